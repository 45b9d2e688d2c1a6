//! Deterministic parallel map.
//!
//! The CLI owns the thread budget and hands it to library operations as this
//! capability. Results come back in input order; callers perform reductions
//! sequentially (with compensated summation where it matters), so outputs are
//! identical for any thread count.

/// Thread budget for parallel maps. `Threads(1)` runs inline.
#[derive(Debug, Clone, Copy)]
pub struct Threads(pub usize);

impl Default for Threads {
    fn default() -> Self {
        Threads(1)
    }
}

impl Threads {
    pub fn count(&self) -> usize {
        self.0.max(1)
    }

    /// Apply `f` to every item, preserving order.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync,
    {
        let n = items.len();
        let workers = self.count().min(n.max(1));
        if workers <= 1 || n == 0 {
            return items.iter().map(&f).collect();
        }
        let mut out: Vec<Option<U>> = (0..n).map(|_| None).collect();
        let chunk = n.div_ceil(workers);
        std::thread::scope(|scope| {
            let f = &f;
            let mut rest = out.as_mut_slice();
            let mut start = 0usize;
            while !rest.is_empty() {
                let take = chunk.min(rest.len());
                let (head, tail) = rest.split_at_mut(take);
                let items_chunk = &items[start..start + take];
                scope.spawn(move || {
                    for (slot, item) in head.iter_mut().zip(items_chunk) {
                        *slot = Some(f(item));
                    }
                });
                rest = tail;
                start += take;
            }
        });
        out.into_iter()
            .map(|v| v.expect("worker filled slot"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order_and_matches_serial() {
        let items: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let serial = Threads(1).map(&items, |x| x.sin() * x);
        for workers in [2, 3, 8] {
            let parallel = Threads(workers).map(&items, |x| x.sin() * x);
            assert_eq!(serial, parallel);
        }
    }

    #[test]
    fn empty_input() {
        let out: Vec<i32> = Threads(4).map(&[] as &[i32], |x| *x);
        assert!(out.is_empty());
    }
}
