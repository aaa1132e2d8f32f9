use super::error::{NumError, NumResult};
use super::real::Real;
use super::tensor::Tensor;

/// Named, ordered list of trainable tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore { names: Vec::new(), tensors: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, t: Tensor<T>) -> usize {
        self.names.push(name.into());
        self.tensors.push(t);
        self.tensors.len() - 1
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub fn get(&self, i: usize) -> &Tensor<T> {
        &self.tensors[i]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Tensor<T> {
        &mut self.tensors[i]
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Checks that `grads` line up one-to-one with the stored tensors.
    pub fn check_conformant(&self, grads: &[Tensor<T>]) -> NumResult<()> {
        if grads.len() != self.len() {
            return Err(NumError::contract(
                "ParamStore",
                format!("{} gradients for {} parameters", grads.len(), self.len()),
            ));
        }
        for (i, (p, g)) in self.tensors.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() {
                return Err(NumError::Contract {
                    op: "ParamStore",
                    msg: format!("gradient for `{}` has shape {:?}, expected {:?}", self.names[i], g.shape(), p.shape()),
                });
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}
