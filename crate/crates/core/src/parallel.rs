//! Deterministic data-parallel helpers.
//!
//! Every parallel loop in this crate goes through `par_map`, which preserves
//! input order, and reductions go through [`pairwise_sum`], which uses a fixed
//! binary-tree association independent of the number of worker threads. A
//! given seed therefore produces bit-identical results at any `--jobs` value,
//! and with the `parallel` feature disabled entirely.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Sequential fallback of [`par_map`].
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Map `f` over indices `0..count`, preserving order.
#[cfg(feature = "parallel")]
pub fn par_map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Sequential fallback of [`par_map_indexed`].
#[cfg(not(feature = "parallel"))]
pub fn par_map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Sum with a fixed pairwise (binary tree) association.
///
/// The result depends only on the order of `items`, never on thread count.
pub fn pairwise_sum<T, A>(items: Vec<T>, zero: impl Fn() -> T, add: A) -> T
where
    A: Fn(T, T) -> T + Copy,
{
    fn rec<T, A: Fn(T, T) -> T + Copy>(buf: &mut Vec<Option<T>>, lo: usize, hi: usize, add: A) -> Option<T> {
        match hi - lo {
            0 => None,
            1 => buf[lo].take(),
            len => {
                let mid = lo + len / 2;
                let left = rec(buf, lo, mid, add);
                let right = rec(buf, mid, hi, add);
                match (left, right) {
                    (Some(a), Some(b)) => Some(add(a, b)),
                    (Some(a), None) | (None, Some(a)) => Some(a),
                    (None, None) => None,
                }
            }
        }
    }
    let n = items.len();
    let mut buf: Vec<Option<T>> = items.into_iter().map(Some).collect();
    rec(&mut buf, 0, n, add).unwrap_or_else(zero)
}

/// Pairwise sum of `f64` values.
pub fn pairwise_sum_f64(items: &[f64]) -> f64 {
    fn rec(s: &[f64]) -> f64 {
        match s.len() {
            0 => 0.0,
            1 => s[0],
            n => rec(&s[..n / 2]) + rec(&s[n / 2..]),
        }
    }
    rec(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential_on_integers() {
        let v: Vec<i64> = (1..=1000).collect();
        let s = pairwise_sum(v, || 0i64, |a, b| a + b);
        assert_eq!(s, 500500);
    }

    #[test]
    fn par_map_preserves_order() {
        let v: Vec<usize> = (0..257).collect();
        let out = par_map(&v, |x| x * 2);
        assert_eq!(out, (0..257).map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn pairwise_f64_is_deterministic() {
        let v: Vec<f64> = (0..1023).map(|i| (i as f64).sin()).collect();
        let a = pairwise_sum_f64(&v);
        let b = pairwise_sum_f64(&v);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
