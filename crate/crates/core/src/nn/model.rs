use crate::nn::tensor::Tensor;

/// A model whose trainable state is an ordered list of named tensors.
///
/// The order of [`Parameterized::params`] and [`Parameterized::params_mut`]
/// must agree; gradient vectors use the same order.
pub trait Parameterized {
    fn param_names(&self) -> Vec<String>;
    fn params(&self) -> Vec<&Tensor>;
    fn params_mut(&mut self) -> Vec<&mut Tensor>;

    fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn zero_grads(&self) -> Vec<Tensor> {
        self.params().iter().map(|p| Tensor::zeros(p.shape())).collect()
    }
}
