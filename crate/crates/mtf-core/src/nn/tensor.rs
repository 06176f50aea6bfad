//! Dense row-major tensors backing the named parameter store.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T> Default for Tensor<T> {
    fn default() -> Self {
        Tensor {
            shape: Vec::new(),
            data: Vec::new(),
        }
    }
}

impl<T: Real> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Tensor<T> {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: alloc::vec![T::ZERO; n],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Tensor<T> {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape/data mismatch");
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn filled(shape: &[usize], value: T) -> Tensor<T> {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: alloc::vec![value; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn map_precision<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Named tensor collection; parameters and gradients share this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMap<T> {
    map: BTreeMap<String, Tensor<T>>,
}

impl<T: Real> Default for TensorMap<T> {
    fn default() -> Self {
        TensorMap {
            map: BTreeMap::new(),
        }
    }
}

impl<T: Real> TensorMap<T> {
    pub fn new() -> TensorMap<T> {
        TensorMap::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor<T>) {
        self.map.insert(name.into(), tensor);
    }

    pub fn get(&self, name: &str) -> &Tensor<T> {
        self.map
            .get(name)
            .unwrap_or_else(|| panic!("missing tensor `{name}`"))
    }

    pub fn try_get(&self, name: &str) -> Option<&Tensor<T>> {
        self.map.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor<T> {
        self.map
            .get_mut(name)
            .unwrap_or_else(|| panic!("missing tensor `{name}`"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor<T>)> {
        self.map.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    /// Zero-filled gradient store with the same names and shapes.
    pub fn zeros_like(&self) -> TensorMap<T> {
        let mut out = TensorMap::new();
        for (name, t) in &self.map {
            out.map.insert(name.clone(), Tensor::zeros(t.shape()));
        }
        out
    }

    pub fn map_precision<U: Real>(&self) -> TensorMap<U> {
        let mut out = TensorMap::new();
        for (name, t) in &self.map {
            out.map.insert(name.clone(), t.map_precision::<U>());
        }
        out
    }

    pub fn total_params(&self) -> usize {
        self.map.values().map(|t| t.numel()).sum()
    }
}
