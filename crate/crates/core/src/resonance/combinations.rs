use crate::model::FrequencySystem;

use super::ResonanceError;

/// Default cap on the number of enumerated lattice points.
pub const DEFAULT_LATTICE_CAP: u128 = 10_000_000;

/// `k` together with `|sin(h/2 k.w)|` and `||k|| = sum |k_j|`.
///
/// Only the canonical representative of `{k, -k}` (first nonzero entry
/// positive) is stored; both have the same sine magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SineCombination {
    pub k: Vec<i64>,
    pub value: f64,
    pub norm: u32,
}

pub fn dot(k: &[i64], w: &[f64]) -> f64 {
    k.iter().zip(w).map(|(&a, &b)| a as f64 * b).sum()
}

pub fn l1_norm(k: &[i64]) -> u32 {
    k.iter().map(|x| x.unsigned_abs() as u32).sum()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of `k` in `Z^ell` with `||k|| <= radius`, the origin included.
pub fn lattice_point_count(ell: usize, radius: u32) -> u128 {
    let (l, r) = (ell as u128, radius as u128);
    (0..=l.min(r)).map(|i| (1u128 << i) * binomial(l, i) * binomial(r, i)).sum()
}

/// Number of canonical `k` with `1 <= ||k|| <= radius`.
pub fn canonical_count(ell: usize, radius: u32) -> u128 {
    (lattice_point_count(ell, radius) - 1) / 2
}

/// All canonical `k` with `1 <= ||k|| <= radius`, in a fixed deterministic order.
pub fn canonical_vectors(ell: usize, radius: u32, cap: u128) -> Result<Vec<Vec<i64>>, ResonanceError> {
    let count = lattice_point_count(ell, radius);
    if count > cap {
        return Err(ResonanceError::CombinatorialOverflow { count, cap });
    }
    let mut out = Vec::with_capacity(canonical_count(ell, radius) as usize);
    let mut k = vec![0i64; ell];
    fill(&mut k, 0, radius as i64, false, &mut out);
    Ok(out)
}

fn fill(k: &mut Vec<i64>, pos: usize, budget: i64, seen_nonzero: bool, out: &mut Vec<Vec<i64>>) {
    if pos == k.len() {
        if seen_nonzero {
            out.push(k.clone());
        }
        return;
    }
    let lo = if seen_nonzero { -budget } else { 0 };
    for v in lo..=budget {
        k[pos] = v;
        fill(k, pos + 1, budget - v.abs(), seen_nonzero || v != 0, out);
    }
    k[pos] = 0;
}

/// `{ |sin(h/2 k.w)| : ||k|| <= N+1 }` over the fast frequencies.
pub fn sine_combinations(freq: &FrequencySystem, h: f64, n: u32) -> Result<Vec<SineCombination>, ResonanceError> {
    sine_combinations_capped(freq, h, n, DEFAULT_LATTICE_CAP)
}

pub fn sine_combinations_capped(
    freq: &FrequencySystem,
    h: f64,
    n: u32,
    cap: u128,
) -> Result<Vec<SineCombination>, ResonanceError> {
    if n < 1 || freq.num_fast() < 1 {
        return Err(ResonanceError::InvalidInput(format!(
            "need N >= 1 and at least one fast block (N = {n}, l = {})",
            freq.num_fast()
        )));
    }
    combinations_for(freq.fast_omegas(), h, n + 1, cap)
}

pub(crate) fn combinations_for(
    omegas: &[f64],
    h: f64,
    radius: u32,
    cap: u128,
) -> Result<Vec<SineCombination>, ResonanceError> {
    let ks = canonical_vectors(omegas.len(), radius, cap)?;
    Ok(ks
        .into_iter()
        .map(|k| {
            let value = (0.5 * h * dot(&k, omegas)).sin().abs();
            let norm = l1_norm(&k);
            SineCombination { k, value, norm }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use std::f64::consts::PI;

    fn brute_canonical(ell: usize, radius: i64) -> BTreeSet<Vec<i64>> {
        let mut all = vec![vec![]];
        for _ in 0..ell {
            all = all
                .into_iter()
                .flat_map(|v: Vec<i64>| {
                    (-radius..=radius).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        all.into_iter()
            .filter(|k| {
                let n: i64 = k.iter().map(|x| x.abs()).sum();
                let first = k.iter().find(|&&x| x != 0);
                n >= 1 && n <= radius && first.is_some_and(|&x| x > 0)
            })
            .collect()
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for ell in 1..=3 {
            for radius in 1..=4u32 {
                let got: BTreeSet<_> = canonical_vectors(ell, radius, u128::MAX).unwrap().into_iter().collect();
                let want = brute_canonical(ell, radius as i64);
                assert_eq!(got, want, "ell={ell} radius={radius}");
                assert_eq!(canonical_count(ell, radius), want.len() as u128);
            }
        }
    }

    #[test]
    fn two_frequencies_n1() {
        let ks: BTreeSet<_> = canonical_vectors(2, 2, u128::MAX).unwrap().into_iter().collect();
        let want: BTreeSet<Vec<i64>> =
            [vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1], vec![2, 0], vec![0, 2]].into_iter().collect();
        assert_eq!(ks, want);
    }

    #[test]
    fn single_frequency_values() {
        let f = FrequencySystem::new(vec![0, 1], vec![0.0, 1.0]).unwrap();
        let c = sine_combinations(&f, 2.0 * PI / 3.0, 2).unwrap();
        let v: Vec<f64> = c.iter().map(|c| c.value).collect();
        let s3 = 3f64.sqrt() / 2.0;
        assert_eq!(c.iter().map(|c| c.k[0]).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!((v[0] - s3).abs() < 1e-15 && (v[1] - s3).abs() < 1e-15 && v[2] < 1e-15);

        let c = sine_combinations(&f, PI, 1).unwrap();
        assert!((c[0].value - 1.0).abs() < 1e-16 && c[1].value < 1e-15);
    }

    #[test]
    fn overflow_cap() {
        let f = FrequencySystem::new(vec![0, 1, 1, 1], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            sine_combinations_capped(&f, 0.1, 3, 100),
            Err(ResonanceError::CombinatorialOverflow { count: 129, cap: 100 })
        ));
    }
}
