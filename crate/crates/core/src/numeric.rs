//! Floating-point summation with a fixed, thread-count independent order.

use rayon::prelude::*;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another accumulator, keeping its compensation term.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Number of consecutive indices handled by one parallel task.
///
/// Chunk boundaries depend only on this constant, never on the pool size,
/// so the reduction order (and therefore every bit of the result) is the
/// same for any number of threads.
pub const CHUNK: u64 = 64;

/// Sums `term(i)` over the given indices in ascending order.
///
/// Work is split into fixed chunks evaluated in parallel; chunk partial sums
/// are then merged sequentially in chunk order.
pub fn deterministic_sum<F>(indices: &[u64], term: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let partials: Vec<CompensatedSum> = indices
        .par_chunks(CHUNK as usize)
        .map(|chunk| chunk.iter().map(|&i| term(i)).collect())
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

/// Same as [`deterministic_sum`] for a family of sums sharing the index set.
///
/// `terms(i, out)` must write one term per output slot into `out`.
pub fn deterministic_sums<F>(indices: &[u64], width: usize, terms: F) -> Vec<f64>
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let partials: Vec<Vec<CompensatedSum>> = indices
        .par_chunks(CHUNK as usize)
        .map(|chunk| {
            let mut acc = vec![CompensatedSum::new(); width];
            let mut buf = vec![0.0; width];
            for &i in chunk {
                terms(i, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.add(x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![CompensatedSum::new(); width];
    for p in &partials {
        for (t, x) in total.iter_mut().zip(p) {
            t.merge(x);
        }
    }
    total.iter().map(CompensatedSum::value).collect()
}
