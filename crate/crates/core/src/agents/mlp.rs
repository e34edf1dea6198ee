use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::env::QasObservation;
use crate::scalar::Real;

/// Dense layer computing `x W + b`; `w` is `inputs x outputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub w: Array2<T>,
    pub b: Array1<T>,
}

impl<T: Real> Layer<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { w: Array2::zeros((inputs, outputs)), b: Array1::zeros(outputs) }
    }
}

/// Sparse input row: listed entries, everything else zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow<T> {
    pub idx: Vec<u32>,
    pub val: Vec<T>,
}

impl<T: Real> SparseRow<T> {
    /// Structure ones plus the trailing cost feature.
    pub fn from_observation(obs: &QasObservation) -> Self {
        let mut idx = obs.ones.clone();
        let mut val = vec![T::one(); idx.len()];
        if obs.cost_feature != 0.0 {
            idx.push((obs.input_len() - 1) as u32);
            val.push(T::lit(obs.cost_feature));
        }
        Self { idx, val }
    }
}

/// Network input batch.
#[derive(Clone, Debug)]
pub enum Input<'a, T> {
    Dense(ArrayView2<'a, T>),
    Sparse(&'a [SparseRow<T>]),
}

impl<T: Real> Input<'_, T> {
    fn rows(&self) -> usize {
        match self {
            Input::Dense(x) => x.nrows(),
            Input::Sparse(r) => r.len(),
        }
    }
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct Cache<T> {
    /// Post-activation output of each hidden layer, then the raw output.
    acts: Vec<Array2<T>>,
}

impl<T> Cache<T> {
    pub fn output(&self) -> &Array2<T> {
        self.acts.last().expect("at least one layer")
    }
}

/// Feed-forward network with ReLU hidden layers and a linear output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Layer<T>>,
}

impl<T: Real> Mlp<T> {
    /// `sizes = [input, hidden.., output]`, weights uniform in
    /// `+-1/sqrt(fan_in)`, biases zero.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|p| {
                let bound = 1.0 / (p[0] as f64).sqrt();
                let w = Array2::from_shape_simple_fn((p[0], p[1]), || T::lit(rng.random_range(-bound..bound)));
                Layer { w, b: Array1::zeros(p[1]) }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self { layers: sizes.windows(2).map(|p| Layer::zeros(p[0], p[1])).collect() }
    }

    pub fn from_layers(layers: Vec<Layer<T>>) -> Self {
        for p in layers.windows(2) {
            assert_eq!(p[0].w.ncols(), p[1].w.nrows(), "layer shapes must chain");
        }
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().expect("non-empty").w.ncols()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_len()];
        s.extend(self.layers.iter().map(|l| l.w.ncols()));
        s
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn copy_from(&mut self, other: &Self) {
        self.layers.clone_from(&other.layers);
    }

    pub fn forward(&self, x: Input<'_, T>) -> Array2<T> {
        self.forward_cached(x).acts.pop().expect("output")
    }

    pub fn forward_cached(&self, x: Input<'_, T>) -> Cache<T> {
        let mut acts = Vec::with_capacity(self.layers.len());
        let first = &self.layers[0];
        let mut h = match x {
            Input::Dense(x) => {
                assert_eq!(x.ncols(), self.input_len(), "input width");
                x.dot(&first.w) + &first.b
            }
            Input::Sparse(rows) => {
                let mut z = Array2::from_shape_fn((rows.len(), first.w.ncols()), |(_, j)| first.b[j]);
                for (r, row) in rows.iter().enumerate() {
                    let mut out = z.row_mut(r);
                    for (&i, &v) in row.idx.iter().zip(&row.val) {
                        out.scaled_add(v, &first.w.row(i as usize));
                    }
                }
                z
            }
        };
        for layer in &self.layers[1..] {
            h.mapv_inplace(|v| v.max(T::zero()));
            let next = h.dot(&layer.w) + &layer.b;
            acts.push(h);
            h = next;
        }
        acts.push(h);
        Cache { acts }
    }

    /// Parameter gradients of a loss given `d loss / d output`.
    pub fn backward(&self, x: Input<'_, T>, cache: &Cache<T>, grad_out: &Array2<T>) -> Vec<Layer<T>> {
        let n = self.layers.len();
        assert_eq!(grad_out.dim(), cache.output().dim(), "output gradient shape");
        assert_eq!(x.rows(), grad_out.nrows(), "batch size");
        let mut grads: Vec<Layer<T>> = Vec::with_capacity(n);
        let mut delta = grad_out.clone();
        for l in (0..n).rev() {
            let gb = delta.sum_axis(Axis(0));
            let gw = if l > 0 {
                let a = &cache.acts[l - 1];
                let gw = a.t().dot(&delta);
                let mut prev = delta.dot(&self.layers[l].w.t());
                prev.zip_mut_with(a, |d, &act| {
                    if act <= T::zero() {
                        *d = T::zero();
                    }
                });
                delta = prev;
                gw
            } else {
                match &x {
                    Input::Dense(x) => x.t().dot(&delta),
                    Input::Sparse(rows) => {
                        let mut gw = Array2::zeros(self.layers[0].w.dim());
                        for (r, row) in rows.iter().enumerate() {
                            let d = delta.row(r);
                            for (&i, &v) in row.idx.iter().zip(&row.val) {
                                gw.row_mut(i as usize).scaled_add(v, &d);
                            }
                        }
                        gw
                    }
                }
            };
            grads.push(Layer { w: gw, b: gb });
        }
        grads.reverse();
        grads
    }

    /// Flat parameter access (weights then bias, layer by layer).
    pub fn param(&self, i: usize) -> T {
        let (l, is_w, k) = self.locate(i);
        let layer = &self.layers[l];
        if is_w {
            layer.w.as_slice().expect("standard layout")[k]
        } else {
            layer.b[k]
        }
    }

    pub fn set_param(&mut self, i: usize, v: T) {
        let (l, is_w, k) = self.locate(i);
        let layer = &mut self.layers[l];
        if is_w {
            layer.w.as_slice_mut().expect("standard layout")[k] = v;
        } else {
            layer.b[k] = v;
        }
    }

    fn locate(&self, mut i: usize) -> (usize, bool, usize) {
        for (l, layer) in self.layers.iter().enumerate() {
            if i < layer.w.len() {
                return (l, true, i);
            }
            i -= layer.w.len();
            if i < layer.b.len() {
                return (l, false, i);
            }
            i -= layer.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }
}

/// Flattened view of gradients, in the same order as [`Mlp::param`].
pub fn flat_grad<T: Real>(grads: &[Layer<T>], mut i: usize) -> T {
    for g in grads {
        if i < g.w.len() {
            return g.w.as_slice().expect("standard layout")[i];
        }
        i -= g.w.len();
        if i < g.b.len() {
            return g.b[i];
        }
        i -= g.b.len();
    }
    panic!("gradient index out of range");
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_zero_output() {
        let net = Mlp::<f64>::zeros(&[4, 3, 2]);
        let out = net.forward(Input::Dense(array![[1.0, -2.0, 3.0, 0.5]].view()));
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_single_hidden_unit() {
        // h = relu(2 x1 - x2 + 0.5); y = 3 h - 1
        let net = Mlp::from_layers(vec![
            Layer { w: array![[2.0], [-1.0]], b: array![0.5] },
            Layer { w: array![[3.0]], b: array![-1.0] },
        ]);
        let out = net.forward(Input::Dense(array![[1.0, 0.5], [-1.0, 1.0]].view()));
        assert_eq!(out, array![[3.0 * 2.0 - 1.0], [-1.0]]);
    }

    #[test]
    fn sparse_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::new(&[6, 5, 3], &mut rng);
        let rows = vec![SparseRow { idx: vec![1, 4], val: vec![1.0, 0.25] }, SparseRow { idx: vec![], val: vec![] }];
        let dense = array![[0.0, 1.0, 0.0, 0.0, 0.25, 0.0], [0.0; 6]];
        let a = net.forward_cached(Input::Sparse(&rows));
        let b = net.forward_cached(Input::Dense(dense.view()));
        assert!((a.output() - b.output()).iter().all(|v| v.abs() < 1e-15));
        let g = Array2::from_elem((2, 3), 0.7);
        let ga = net.backward(Input::Sparse(&rows), &a, &g);
        let gb = net.backward(Input::Dense(dense.view()), &b, &g);
        assert_eq!(ga, gb);
    }

    #[test]
    fn parameter_indexing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = Mlp::<f32>::new(&[3, 4, 2], &mut rng);
        assert_eq!(net.param_count(), 3 * 4 + 4 + 4 * 2 + 2);
        net.set_param(17, 9.0);
        assert_eq!(net.layers()[1].w[[0, 1]], 9.0);
        assert_eq!(net.param(17), 9.0);
    }
}
