//! Integer lattices in Hermite normal form.
//!
//! Basis rows are in row echelon form with strictly increasing pivot
//! columns, positive pivots, and entries above each pivot reduced into
//! `[0, pivot)`. This form is unique for a given lattice.

/// A `Z`-submodule of `Z^ell` and the generators it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonanceModule {
    dim: usize,
    basis: Vec<Vec<i64>>,
    generators: Vec<Vec<i64>>,
}

impl ResonanceModule {
    pub fn empty(dim: usize) -> Self {
        ResonanceModule { dim, basis: Vec::new(), generators: Vec::new() }
    }

    /// Ambient dimension `ell`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank of the module.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        in_module(k, self)
    }
}

fn axpy_row(target: &mut [i64], q: i64, src: &[i64]) {
    for (t, s) in target.iter_mut().zip(src) {
        *t -= q * s;
    }
}

/// Hermite normal form of the rows of `rows` (zero rows dropped).
pub fn hermite_normal_form(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    for r in &m {
        assert_eq!(r.len(), dim, "generator length does not match dimension");
    }
    let mut rank = 0;
    for col in 0..dim {
        if rank == m.len() {
            break;
        }
        // Euclid on the column until a single nonzero entry remains at `rank`
        loop {
            let pivot = (rank..m.len()).filter(|&i| m[i][col] != 0).min_by_key(|&i| m[i][col].unsigned_abs());
            let Some(p) = pivot else { break };
            m.swap(rank, p);
            let mut done = true;
            for i in rank + 1..m.len() {
                if m[i][col] != 0 {
                    let q = m[i][col] / m[rank][col];
                    let (head, tail) = m.split_at_mut(i);
                    axpy_row(&mut tail[0], q, &head[rank]);
                    if tail[0][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[rank][col] == 0 {
            continue;
        }
        if m[rank][col] < 0 {
            for x in m[rank].iter_mut() {
                *x = -*x;
            }
        }
        let p = m[rank][col];
        for i in 0..rank {
            let q = m[i][col].div_euclid(p);
            if q != 0 {
                let (head, tail) = m.split_at_mut(rank);
                axpy_row(&mut head[i], q, &tail[0]);
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

/// The module generated by `generators` in `Z^dim`.
pub fn module_basis(dim: usize, generators: &[Vec<i64>]) -> ResonanceModule {
    ResonanceModule { dim, basis: hermite_normal_form(generators, dim), generators: generators.to_vec() }
}

/// Exact membership test by reduction against the echelon basis.
pub fn in_module(k: &[i64], module: &ResonanceModule) -> bool {
    assert_eq!(k.len(), module.dim, "vector length does not match module dimension");
    let mut v = k.to_vec();
    for row in &module.basis {
        let c = row.iter().position(|&x| x != 0).expect("basis rows are nonzero");
        if v[..c].iter().any(|&x| x != 0) {
            return false;
        }
        if v[c] % row[c] != 0 {
            return false;
        }
        let q = v[c] / row[c];
        axpy_row(&mut v, q, row);
    }
    v.iter().all(|&x| x == 0)
}
