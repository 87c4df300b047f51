//! Brute-force winning-state oracle: every partition, no symmetry, no
//! bounds. Only for tiny states.

use std::collections::HashMap;

pub struct Oracle {
    q: usize,
    memo: HashMap<(Vec<u64>, usize), bool>,
}

impl Oracle {
    pub fn new(q: usize) -> Self {
        Oracle { q, memo: HashMap::new() }
    }

    /// `c` bottom-up, `c[i]` = candidates with capacity `i`.
    pub fn wins(&mut self, c: &[u64], n: usize) -> bool {
        if n == 0 {
            return c.iter().sum::<u64>() <= 1;
        }
        if let Some(&v) = self.memo.get(&(c.to_vec(), n)) {
            return v;
        }
        let v = all_partitions(c, self.q)
            .iter()
            .any(|parts| children(c, parts).iter().all(|x| self.wins(x, n - 1)));
        self.memo.insert((c.to_vec(), n), v);
        v
    }
}

/// Every way to split each `c[i]` into `q` ordered parts.
pub fn all_partitions(c: &[u64], q: usize) -> Vec<Vec<Vec<u64>>> {
    let mut out = vec![vec![vec![0u64; c.len()]; q]];
    for (i, &total) in c.iter().enumerate() {
        let mut next = Vec::new();
        for acc in &out {
            for comp in compositions(total, q) {
                let mut p = acc.clone();
                for j in 0..q {
                    p[j][i] = comp[j];
                }
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Answer `j`: elements outside part `j` lose one capacity level, and
/// those at capacity 0 drop out.
pub fn children(c: &[u64], parts: &[Vec<u64>]) -> Vec<Vec<u64>> {
    (0..parts.len())
        .map(|j| {
            let mut x = parts[j].clone();
            for (k, p) in parts.iter().enumerate() {
                if k == j {
                    continue;
                }
                for i in 1..c.len() {
                    x[i - 1] += p[i];
                }
            }
            x
        })
        .collect()
}

/// All count vectors of dimension `1..=max_dim` with total at most `max_total`.
pub fn small_states(max_dim: usize, max_total: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for dim in 1..=max_dim {
        let mut cur = vec![vec![]];
        for _ in 0..dim {
            let mut next = Vec::new();
            for v in &cur {
                let used: u64 = v.iter().sum();
                for x in 0..=(max_total - used) {
                    let mut w: Vec<u64> = v.clone();
                    w.push(x);
                    next.push(w);
                }
            }
            cur = next;
        }
        out.extend(cur);
    }
    out
}
