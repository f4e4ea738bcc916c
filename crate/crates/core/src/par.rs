//! Data-parallel map over index ranges with a serial fallback.
//!
//! [`Exec::Parallel`] uses rayon when the crate is built with the `parallel`
//! feature and silently degrades to serial execution otherwise. Results are
//! always returned in index order and reduced with [`neumaier_sum`], which
//! keeps sums independent of the execution mode.

/// Execution mode for grid and Monte Carlo loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

impl Exec {
    /// Maps `f` over `0..n`, preserving index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over the items of a slice, preserving order.
    pub fn map_slice<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        self.map(items.len(), |i| f(&items[i]))
    }

    /// Whether work actually runs on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Compensated (Kahan-Babuska-Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let f = |i: usize| (i as f64).sqrt();
        assert_eq!(Exec::Serial.map(1000, f), Exec::Parallel.map(1000, f));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }
}
