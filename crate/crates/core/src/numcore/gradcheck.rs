//! Central-difference gradients, used as the oracle for [`Graph::backward`](super::Graph::backward).

use super::real::Real;
use super::tensor::Tensor;

/// `(f(p + ε) − f(p − ε)) / 2ε` for every coordinate of every tensor.
pub fn finite_diff_gradient<T, F>(mut f: F, params: &[Tensor<T>], eps: f64) -> Vec<Tensor<T>>
where
    T: Real,
    F: FnMut(&[Tensor<T>]) -> T,
{
    let coords: Vec<(usize, usize)> = params
        .iter()
        .enumerate()
        .flat_map(|(p, t)| (0..t.len()).map(move |i| (p, i)))
        .collect();
    let values = finite_diff_coords(&mut f, params, eps, &coords);
    let mut out: Vec<Tensor<T>> = params.iter().map(|t| Tensor::zeros(t.shape())).collect();
    for (&(p, i), v) in coords.iter().zip(values) {
        out[p].data_mut()[i] = v;
    }
    out
}

/// Central differences at selected `(tensor, flat index)` coordinates.
pub fn finite_diff_coords<T, F>(mut f: F, params: &[Tensor<T>], eps: f64, coords: &[(usize, usize)]) -> Vec<T>
where
    T: Real,
    F: FnMut(&[Tensor<T>]) -> T,
{
    let mut work = params.to_vec();
    let h = T::from_f64(eps);
    coords
        .iter()
        .map(|&(p, i)| {
            let orig = work[p].data()[i];
            work[p].data_mut()[i] = orig + h;
            let up = f(&work);
            work[p].data_mut()[i] = orig - h;
            let down = f(&work);
            work[p].data_mut()[i] = orig;
            (up - down) / (h + h)
        })
        .collect()
}

/// `|a − n| / max(|a|, |n|, floor)`; the floor keeps vanishing gradients
/// from turning rounding noise into large ratios.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

pub fn max_relative_error<T: Real>(analytic: &[Tensor<T>], numeric: &[Tensor<T>], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .flat_map(|(a, n)| a.data().iter().zip(n.data()))
        .map(|(&a, &n)| relative_error(a.as_f64(), n.as_f64(), floor))
        .fold(0.0, f64::max)
}
