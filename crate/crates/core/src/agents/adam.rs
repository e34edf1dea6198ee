use super::mlp::{Layer, Mlp};
use crate::scalar::Real;

/// Adaptive-moment optimizer state for one network.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    /// Global gradient-norm clip; non-positive disables it.
    pub max_grad_norm: T,
    m: Vec<Layer<T>>,
    v: Vec<Layer<T>>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(net: &Mlp<T>, lr: T, max_grad_norm: T) -> Self {
        let zeros = || net.sizes().windows(2).map(|p| zero_layer(p[0], p[1])).collect::<Vec<_>>();
        Self {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            max_grad_norm,
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, net: &mut Mlp<T>, grads: &[Layer<T>]) {
        let scale = clip_scale(grads, self.max_grad_norm);
        self.t += 1;
        let bc1 = T::one() - self.beta1.powi(self.t);
        let bc2 = T::one() - self.beta2.powi(self.t);
        let hp = Hyper { lr: self.lr, b1: self.beta1, b2: self.beta2, eps: self.eps, scale, bc1, bc2 };
        for (l, g) in grads.iter().enumerate() {
            let layer = &mut net.layers_mut()[l];
            let (m, v) = (&mut self.m[l], &mut self.v[l]);
            hp.apply(slice(&mut layer.w), g.w.as_slice().expect("layout"), slice(&mut m.w), slice(&mut v.w));
            hp.apply(slice(&mut layer.b), g.b.as_slice().expect("layout"), slice(&mut m.b), slice(&mut v.b));
        }
    }
}

fn zero_layer<T: Real>(i: usize, o: usize) -> Layer<T> {
    Layer { w: ndarray::Array2::zeros((i, o)), b: ndarray::Array1::zeros(o) }
}

/// Factor that brings the global gradient norm down to `max_norm`.
pub fn clip_scale<T: Real>(grads: &[Layer<T>], max_norm: T) -> T {
    if max_norm <= T::zero() {
        return T::one();
    }
    let sq: T = grads.iter().map(|g| g.w.iter().chain(g.b.iter()).map(|&x| x * x).sum::<T>()).sum();
    let norm = sq.sqrt();
    if norm > max_norm {
        max_norm / norm
    } else {
        T::one()
    }
}

fn slice<T, D: ndarray::Dimension>(a: &mut ndarray::Array<T, D>) -> &mut [T] {
    a.as_slice_mut().expect("standard layout")
}

#[derive(Clone, Copy)]
struct Hyper<T> {
    lr: T,
    b1: T,
    b2: T,
    eps: T,
    scale: T,
    bc1: T,
    bc2: T,
}

impl<T: Real> Hyper<T> {
    fn apply(&self, p: &mut [T], g: &[T], m: &mut [T], v: &mut [T]) {
        let one = T::one();
        for i in 0..p.len() {
            let gi = g[i] * self.scale;
            m[i] = self.b1 * m[i] + (one - self.b1) * gi;
            v[i] = self.b2 * v[i] + (one - self.b2) * gi * gi;
            p[i] -= self.lr * (m[i] / self.bc1) / ((v[i] / self.bc2).sqrt() + self.eps);
        }
    }
}

/// Adam moments for one tensor, used by the shared A3C store.
#[derive(Clone, Debug)]
pub struct TensorAdam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Real> TensorAdam<T> {
    pub fn new(len: usize) -> Self {
        Self { m: vec![T::zero(); len], v: vec![T::zero(); len], t: 0 }
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T], lr: T, scale: T) {
        self.t += 1;
        let (b1, b2) = (T::lit(0.9), T::lit(0.999));
        let hp = Hyper {
            lr,
            b1,
            b2,
            eps: T::lit(1e-8),
            scale,
            bc1: T::one() - b1.powi(self.t),
            bc2: T::one() - b2.powi(self.t),
        };
        hp.apply(params, grad, &mut self.m, &mut self.v);
    }
}
