//! Forward kernels shared by the eager API and the autodiff graph.

use super::error::{NumError, NumResult};
use super::real::Real;
use super::tensor::Tensor;

/// Gate blocks of a packed LSTM weight matrix, in row order.
pub const LSTM_GATES: [&str; 4] = ["input", "forget", "candidate", "output"];
pub const FORGET_GATE: usize = 1;

/// `out[i] = Σ_j w[i][j] x[j]` for a row-major `rows × cols` matrix.
pub(crate) fn matvec_into<T: Real>(w: &[T], rows: usize, cols: usize, x: &[T], out: &mut [T]) {
    debug_assert_eq!(w.len(), rows * cols);
    for (i, o) in out.iter_mut().enumerate().take(rows) {
        let row = &w[i * cols..(i + 1) * cols];
        let mut acc = T::zero();
        for (&a, &b) in row.iter().zip(x) {
            acc += a * b;
        }
        *o = acc;
    }
}

/// `out[j] += Σ_i w[i][j] g[i]`.
pub(crate) fn matvec_t_acc<T: Real>(w: &[T], rows: usize, cols: usize, g: &[T], out: &mut [T]) {
    for i in 0..rows {
        let gi = g[i];
        if gi == T::zero() {
            continue;
        }
        let row = &w[i * cols..(i + 1) * cols];
        for (o, &a) in out.iter_mut().zip(row) {
            *o += gi * a;
        }
    }
}

/// `out[i][j] += g[i] x[j]`.
pub(crate) fn outer_acc<T: Real>(g: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for (i, &gi) in g.iter().enumerate() {
        if gi == T::zero() {
            continue;
        }
        let row = &mut out[i * cols..(i + 1) * cols];
        for (o, &b) in row.iter_mut().zip(x) {
            *o += gi * b;
        }
    }
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub(crate) fn softmax_slice<T: Real>(e: &[T], out: &mut [T]) {
    let max = e.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for (o, &x) in out.iter_mut().zip(e) {
        *o = (x - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Numerically stable softmax over a vector.
pub fn softmax<T: Real>(e: &Tensor<T>) -> NumResult<Tensor<T>> {
    if e.is_empty() {
        return Err(NumError::Domain { op: "softmax", msg: "empty input".into() });
    }
    if !e.is_finite() {
        return Err(NumError::NonFinite { op: "softmax" });
    }
    let mut out = vec![T::zero(); e.len()];
    softmax_slice(e.data(), &mut out);
    Tensor::new(e.shape().to_vec(), out)
}

/// `W x + b`.
pub fn linear_forward<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> NumResult<Tensor<T>> {
    if w.shape().len() != 2 || w.shape()[1] != x.len() {
        return Err(NumError::dim("linear_forward", "W", w.shape(), "x", x.shape()));
    }
    if b.len() != w.shape()[0] {
        return Err(NumError::dim("linear_forward", "W", w.shape(), "b", b.shape()));
    }
    let (rows, cols) = (w.shape()[0], w.shape()[1]);
    let mut out = vec![T::zero(); rows];
    matvec_into(w.data(), rows, cols, x.data(), &mut out);
    for (o, &bi) in out.iter_mut().zip(b.data()) {
        *o += bi;
    }
    Ok(Tensor::vector(out))
}

/// Packed LSTM weights: `w` is `4H × (d_in + H)` acting on `[x; h_prev]`,
/// gate blocks ordered as [`LSTM_GATES`].
#[derive(Debug, Clone, Copy)]
pub struct LstmWeights<'a, T> {
    pub w: &'a Tensor<T>,
    pub b: &'a Tensor<T>,
}

pub fn lstm_cell_forward<T: Real>(
    x: &Tensor<T>,
    h_prev: &Tensor<T>,
    c_prev: &Tensor<T>,
    weights: LstmWeights<'_, T>,
) -> NumResult<(Tensor<T>, Tensor<T>)> {
    let hidden = h_prev.len();
    if c_prev.len() != hidden {
        return Err(NumError::dim("lstm_cell_forward", "h_prev", h_prev.shape(), "c_prev", c_prev.shape()));
    }
    let expected = [4 * hidden, x.len() + hidden];
    if weights.w.shape() != expected {
        return Err(NumError::dim("lstm_cell_forward", "W", weights.w.shape(), "x", x.shape()));
    }
    let mut xh = Vec::with_capacity(x.len() + hidden);
    xh.extend_from_slice(x.data());
    xh.extend_from_slice(h_prev.data());
    let z = linear_forward(&Tensor::vector(xh), weights.w, weights.b)?;
    let z = z.data();
    let mut h = vec![T::zero(); hidden];
    let mut c = vec![T::zero(); hidden];
    for k in 0..hidden {
        let i = sigmoid(z[k]);
        let f = sigmoid(z[hidden + k]);
        let g = z[2 * hidden + k].tanh();
        let o = sigmoid(z[3 * hidden + k]);
        c[k] = f * c_prev.data()[k] + i * g;
        h[k] = o * c[k].tanh();
    }
    Ok((Tensor::vector(h), Tensor::vector(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t(v: &[f64]) -> Tensor<f64> {
        Tensor::vector(v.to_vec())
    }

    #[test]
    fn linear_zero_identity_and_hand_case() {
        let x = t(&[0.3, -1.2]);
        let zero = Tensor::<f64>::zeros(&[2, 2]);
        let out = linear_forward(&x, &zero, &t(&[0.0, 0.0])).unwrap();
        assert_eq!(out.data(), &[0.0, 0.0]);

        let eye = Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = linear_forward(&x, &eye, &t(&[0.0, 0.0])).unwrap();
        assert_eq!(out.data(), x.data());

        let w = Tensor::matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = linear_forward(&t(&[1.0, 1.0]), &w, &t(&[1.0, 1.0])).unwrap();
        assert_eq!(out.data(), &[4.0, 8.0]);
    }

    #[test]
    fn linear_shape_mismatch_names_operands() {
        let w = Tensor::<f64>::zeros(&[2, 3]);
        let err = linear_forward(&t(&[1.0, 1.0]), &w, &t(&[0.0, 0.0])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("W") && msg.contains("x"), "{msg}");
    }

    #[test]
    fn softmax_cases() {
        let s = softmax(&t(&[0.0, 0.0])).unwrap();
        assert_eq!(s.data(), &[0.5, 0.5]);
        let s = softmax(&t(&[1.0, 2.0, 3.0])).unwrap();
        let expect = [0.09003057317038046, 0.24472847105479764, 0.6652409557748219];
        for (a, b) in s.data().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            softmax(&Tensor::<f64>::new(vec![1], vec![f64::NAN]).unwrap()),
            Err(NumError::NonFinite { .. })
        ));
    }

    #[test]
    fn sigmoid_cases() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!((sigmoid(1.0f64) - 0.7310585786300049).abs() < 1e-12);
        for x in [-30.0f64, -2.5, 0.1, 4.0, 800.0] {
            assert!((sigmoid(-x) - (1.0 - sigmoid(x))).abs() < 1e-12);
            let s = sigmoid(x);
            assert!(s.is_finite() && (0.0..=1.0).contains(&s));
        }
        assert!(sigmoid(-800.0f64) >= 0.0);
    }

    #[test]
    fn lstm_zero_weights() {
        let hidden = 3;
        let w = Tensor::<f64>::zeros(&[4 * hidden, 2 + hidden]);
        let b = Tensor::<f64>::zeros(&[4 * hidden]);
        let x = t(&[0.7, -0.2]);
        let h0 = t(&[0.1, 0.2, 0.3]);
        let (h, c) = lstm_cell_forward(&x, &h0, &Tensor::zeros(&[hidden]), LstmWeights { w: &w, b: &b }).unwrap();
        assert!(h.data().iter().chain(c.data()).all(|&v| v == 0.0));

        let c_prev = t(&[1.0, -2.0, 0.5]);
        let (h, c) = lstm_cell_forward(&x, &h0, &c_prev, LstmWeights { w: &w, b: &b }).unwrap();
        for k in 0..hidden {
            let cc = 0.5 * c_prev.data()[k];
            assert!((c.data()[k] - cc).abs() < 1e-15);
            assert!((h.data()[k] - 0.5 * cc.tanh()).abs() < 1e-15);
        }
    }

    // Independent scalar LSTM: per-unit gate sums written out long-hand.
    fn scalar_lstm(x: &[f64], h: &[f64], c: &[f64], w: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = h.len();
        let pre = |row: usize| -> f64 {
            let mut s = b[row];
            for (j, xv) in x.iter().enumerate() {
                s += w[row][j] * xv;
            }
            for (j, hv) in h.iter().enumerate() {
                s += w[row][x.len() + j] * hv;
            }
            s
        };
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut hn = vec![0.0; n];
        let mut cn = vec![0.0; n];
        for k in 0..n {
            let ig = sig(pre(k));
            let fg = sig(pre(n + k));
            let gg = pre(2 * n + k).tanh();
            let og = sig(pre(3 * n + k));
            cn[k] = fg * c[k] + ig * gg;
            hn[k] = og * cn[k].tanh();
        }
        (hn, cn)
    }

    #[test]
    fn lstm_matches_scalar_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (din, hid) = (rng.gen_range(1..5), rng.gen_range(1..5));
            let rows: Vec<Vec<f64>> =
                (0..4 * hid).map(|_| (0..din + hid).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let b: Vec<f64> = (0..4 * hid).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x: Vec<f64> = (0..din).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..hid).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..hid).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let wt = Tensor::matrix(4 * hid, din + hid, rows.concat()).unwrap();
            let bt = t(&b);
            let (hg, cg) = lstm_cell_forward(&t(&x), &t(&h), &t(&c), LstmWeights { w: &wt, b: &bt }).unwrap();
            let (hr, cr) = scalar_lstm(&x, &h, &c, &rows, &b);
            for k in 0..hid {
                assert!((hg.data()[k] - hr[k]).abs() < 1e-10);
                assert!((cg.data()[k] - cr[k]).abs() < 1e-10);
            }
        }
    }
}
