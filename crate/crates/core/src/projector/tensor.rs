//! Minimal dense row-major tensor arithmetic for projector contraction:
//! axis permutation, paired-axis contraction (as a matrix product), and
//! partial traces for loops.

use std::borrow::Cow;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

impl Tensor {
    pub fn scalar(value: f64) -> Self {
        Tensor {
            dims: Vec::new(),
            data: vec![value],
        }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Tensor {
            dims,
            data: vec![0.0; len],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// The scalar value of a rank-0 tensor.
    pub fn into_scalar(self) -> f64 {
        assert!(self.dims.is_empty(), "tensor still has {} axes", self.dims.len());
        self.data[0]
    }

    /// Data laid out with axis `i` of the result being axis `perm[i]` of
    /// `self`; borrows when `perm` is the identity.
    fn permuted_data(&self, perm: &[usize]) -> Cow<'_, [f64]> {
        debug_assert_eq!(perm.len(), self.dims.len());
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Cow::Borrowed(&self.data);
        }
        let in_strides = strides(&self.dims);
        let out_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut out = vec![0.0; self.data.len()];
        let mut idx = vec![0usize; out_dims.len()];
        let mut in_lin = 0usize;
        let perm_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        for slot in out.iter_mut() {
            *slot = self.data[in_lin];
            // Odometer increment over the output index, tracking the input
            // linear position incrementally.
            for axis in (0..idx.len()).rev() {
                idx[axis] += 1;
                in_lin += perm_strides[axis];
                if idx[axis] < out_dims[axis] {
                    break;
                }
                in_lin -= idx[axis] * perm_strides[axis];
                idx[axis] = 0;
            }
        }
        Cow::Owned(out)
    }

    /// Sum over the diagonal of two equal-sized axes, removing both.
    pub fn trace_pair(&self, a: usize, b: usize) -> Tensor {
        assert_ne!(a, b);
        assert_eq!(self.dims[a], self.dims[b], "traced axes must match");
        let (a, b) = (a.min(b), a.max(b));
        let in_strides = strides(&self.dims);
        let d = self.dims[a];
        let diag_stride = in_strides[a] + in_strides[b];
        let out_dims: Vec<usize> = self
            .dims
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != a && i != b)
            .map(|(_, &d)| d)
            .collect();
        let kept_strides: Vec<usize> = (0..self.dims.len())
            .filter(|&i| i != a && i != b)
            .map(|i| in_strides[i])
            .collect();
        let mut out = Tensor::zeros(out_dims);
        let mut idx = vec![0usize; out.dims.len()];
        let mut base = 0usize;
        for slot in out.data.iter_mut() {
            let mut sum = 0.0;
            let mut pos = base;
            for _ in 0..d {
                sum += self.data[pos];
                pos += diag_stride;
            }
            *slot = sum;
            for axis in (0..idx.len()).rev() {
                idx[axis] += 1;
                base += kept_strides[axis];
                if idx[axis] < out.dims[axis] {
                    break;
                }
                base -= idx[axis] * kept_strides[axis];
                idx[axis] = 0;
            }
        }
        out
    }

    /// Contract paired axes of two tensors: `pairs` lists `(axis_in_self,
    /// axis_in_other)` with equal dimensions. Result axes are the free axes
    /// of `self` (in order) followed by the free axes of `other`.
    pub fn contract(&self, other: &Tensor, pairs: &[(usize, usize)]) -> Tensor {
        let a_paired: Vec<usize> = pairs.iter().map(|&(a, _)| a).collect();
        let b_paired: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
        let a_free: Vec<usize> = (0..self.dims.len()).filter(|i| !a_paired.contains(i)).collect();
        let b_free: Vec<usize> = (0..other.dims.len()).filter(|i| !b_paired.contains(i)).collect();

        let k: usize = a_paired.iter().map(|&i| self.dims[i]).product();
        debug_assert_eq!(
            k,
            b_paired.iter().map(|&i| other.dims[i]).product::<usize>(),
            "paired axes must agree in size"
        );
        let m: usize = a_free.iter().map(|&i| self.dims[i]).product();
        let n: usize = b_free.iter().map(|&i| other.dims[i]).product();

        let a_perm: Vec<usize> = a_free.iter().chain(&a_paired).copied().collect();
        let b_perm: Vec<usize> = b_paired.iter().chain(&b_free).copied().collect();
        let a_data = self.permuted_data(&a_perm);
        let b_data = other.permuted_data(&b_perm);

        let mut out_dims: Vec<usize> = a_free.iter().map(|&i| self.dims[i]).collect();
        out_dims.extend(b_free.iter().map(|&i| other.dims[i]));
        let mut out = Tensor::zeros(out_dims);

        // (M x K) * (K x N); projector rows are sparse, so skip zero factors.
        for i in 0..m {
            let a_row = &a_data[i * k..(i + 1) * k];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (kk, &a_val) in a_row.iter().enumerate() {
                if a_val != 0.0 {
                    let b_row = &b_data[kk * n..(kk + 1) * n];
                    for (o, &b_val) in out_row.iter_mut().zip(b_row) {
                        *o += a_val * b_val;
                    }
                }
            }
        }
        out
    }
}
