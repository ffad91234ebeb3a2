//! Compensated reductions over grid rows.
//!
//! Every reduction sums each row with Neumaier's algorithm and then sums the
//! row totals in row order, so the result does not depend on how rows are
//! distributed across threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn neumaier<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Sum of `f(k)` over the flat indices `0..rows*cols`, row by row.
pub(crate) fn sum_rows<F>(rows: usize, cols: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let row_sum = |r: usize| neumaier((r * cols..(r + 1) * cols).map(&f));
    #[cfg(feature = "parallel")]
    let totals: Vec<f64> = (0..rows).into_par_iter().map(row_sum).collect();
    #[cfg(not(feature = "parallel"))]
    let totals: Vec<f64> = (0..rows).map(row_sum).collect();
    neumaier(totals)
}
