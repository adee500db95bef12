//! Chain simulator (stub).

#[derive(Debug, Clone)]
pub struct ChainState<T> {
    _marker: std::marker::PhantomData<T>,
}

#[derive(Debug, Clone)]
pub struct ChainPotential<T> {
    _marker: std::marker::PhantomData<T>,
}
