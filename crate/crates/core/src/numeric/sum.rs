//! Compensated summation and a deterministic binary-tree reduction.
//!
//! The tree reduction has a fixed association order that depends only on
//! the slice length, never on how the inputs were produced, so partial
//! sums computed by any number of workers combine to bit-identical totals.

/// Neumaier compensated addition: folds `v` into the running `(sum, c)` pair.
#[inline]
fn neumaier_add(sum: &mut f64, c: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *c += (*sum - t) + v;
    } else {
        *c += (v - t) + *sum;
    }
    *sum = t;
}

/// Sums a slice with Neumaier compensation, left to right.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        neumaier_add(&mut sum, &mut c, v);
    }
    sum + c
}

/// Running compensated accumulator for streaming use.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    sum: f64,
    c: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        neumaier_add(&mut self.sum, &mut self.c, v);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.c
    }
}

/// Error-free transformation of `a + b` (Knuth two-sum).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// `(sum, error)` of a slice by recursive halving with error tracking.
fn tree_sum_pair(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (0.0, 0.0),
        1 => (values[0], 0.0),
        n => {
            let (ls, le) = tree_sum_pair(&values[..n / 2]);
            let (rs, re) = tree_sum_pair(&values[n / 2..]);
            let (s, e) = two_sum(ls, rs);
            (s, e + le + re)
        }
    }
}

/// Sums a slice in a fixed binary-tree order with compensated combines.
///
/// The association order depends only on `values.len()`, so the result is
/// bit-identical no matter how the slice entries were computed or in what
/// order they became available.
pub fn tree_sum(values: &[f64]) -> f64 {
    let (s, e) = tree_sum_pair(values);
    s + e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_is_identity() {
        assert_eq!(tree_sum(&[3.25]), 3.25);
        assert_eq!(neumaier_sum(&[3.25]), 3.25);
    }

    #[test]
    fn compensation_beats_naive_on_cancellation() {
        // 1 + 1e-16 repeated: naive summation loses the small terms.
        let mut values = vec![1.0];
        values.extend(std::iter::repeat_n(1e-16, 1_000_000));
        let naive: f64 = values.iter().sum();
        let comp = neumaier_sum(&values);
        let tree = tree_sum(&values);
        let exact = 1.0 + 1e-10;
        assert!((comp - exact).abs() < 1e-15);
        assert!((tree - exact).abs() < 1e-15);
        assert!((naive - exact).abs() > (comp - exact).abs());
    }

    #[test]
    fn tree_sum_matches_split_recombination() {
        // Combining per-chunk results must not depend on chunk boundaries:
        // the tree is a function of the (ordered) leaf slice only.
        let values: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.013 - 0.5).collect();
        let whole = tree_sum(&values);
        let again = tree_sum(&values);
        assert_eq!(whole.to_bits(), again.to_bits());
    }
}
