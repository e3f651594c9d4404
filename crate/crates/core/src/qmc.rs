//! Deterministic low-discrepancy point streams on `[0,1]^d`.
//!
//! The generalized Faure construction: write the point index in a prime
//! base `p >= d`, multiply the digit vector by the `j`-th power of the
//! Pascal matrix modulo `p` for coordinate `j`, and read the result back
//! as a base-`p` fraction. The scrambled variant left-multiplies each
//! generator by a seeded nonsingular lower-triangular matrix, which keeps
//! the net structure intact. Every point is a pure function of its index,
//! so streams can be split into index ranges and replayed.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIMENSION: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    Faure,
    ScrambledFaure,
    UniformPrng,
}

impl SequenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceKind::Faure => "faure",
            SequenceKind::ScrambledFaure => "scrambled-faure",
            SequenceKind::UniformPrng => "uniform-prng",
        }
    }
}

impl std::str::FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faure" => Ok(Self::Faure),
            "scrambled-faure" => Ok(Self::ScrambledFaure),
            "uniform-prng" => Ok(Self::UniformPrng),
            other => Err(Error::Usage(format!("unknown sequence kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub dimension: usize,
    pub kind: SequenceKind,
    pub base: u32,
    pub seed: u64,
    pub skip: u64,
}

impl SequenceSpec {
    /// Spec with the smallest prime base `>= dimension` and the default skip of `base^4`.
    pub fn new(dimension: usize, kind: SequenceKind, seed: u64) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::Usage(format!(
                "sequence dimension must be in 1..={MAX_DIMENSION}, got {dimension}"
            )));
        }
        let base = smallest_prime_at_least(dimension.max(2) as u32);
        Ok(Self {
            dimension,
            kind,
            base,
            seed,
            skip: (base as u64).pow(4),
        })
    }

    pub fn with_skip(mut self, skip: u64) -> Self {
        self.skip = skip;
        self
    }
}

fn smallest_prime_at_least(n: u32) -> u32 {
    (n..).find(|&k| k >= 2 && (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).unwrap()
}

/// Contiguous block of point indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexRange {
    pub start: u64,
    pub len: u64,
}

impl IndexRange {
    pub fn new(start: u64, len: u64) -> Self {
        Self { start, len }
    }

    pub fn end(&self) -> u64 {
        self.start + self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn indices(&self) -> std::ops::Range<u64> {
        self.start..self.end()
    }
}

/// Precomputed generator matrices for one [`SequenceSpec`].
#[derive(Debug)]
struct FaureTables {
    base: u64,
    /// Number of base-`p` digits carried, enough for 63-bit indices and f64 resolution.
    digits: usize,
    /// `generators[j][r * digits + k]`: output digit `r` from input digit `k`, coordinate `j`.
    generators: Vec<Vec<u8>>,
    /// Scrambled generators populate every output row, not only the first `used`.
    lower_triangular: bool,
    powers: Vec<f64>,
}

impl FaureTables {
    fn new(spec: &SequenceSpec) -> Self {
        let p = spec.base as u64;
        let digits_for_index = ((63.0 / (p as f64).log2()).ceil() as usize) + 1;
        let digits_for_f64 = ((53.0 / (p as f64).log2()).ceil() as usize) + 1;
        let digits = digits_for_index.max(digits_for_f64);

        let binom = binomial_table_mod(digits, p);
        let scramble = spec.kind == SequenceKind::ScrambledFaure;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

        let generators = (0..spec.dimension)
            .map(|j| {
                // (P^j)[r][k] = C(k, r) j^(k-r) mod p, upper triangular
                let mut pascal = vec![0u64; digits * digits];
                for r in 0..digits {
                    for k in r..digits {
                        let power = pow_mod(j as u64, (k - r) as u64, p);
                        pascal[r * digits + k] = binom[k][r] * power % p;
                    }
                }
                let matrix = if scramble {
                    let mut lower = vec![0u64; digits * digits];
                    for r in 0..digits {
                        for c in 0..r {
                            lower[r * digits + c] = rng.gen_range(0..p);
                        }
                        lower[r * digits + r] = rng.gen_range(1..p);
                    }
                    mat_mul_mod(&lower, &pascal, digits, p)
                } else {
                    pascal
                };
                matrix.into_iter().map(|v| v as u8).collect()
            })
            .collect();

        let powers = (0..=digits as i32).map(|r| (p as f64).powi(r)).collect();
        Self {
            base: p,
            digits,
            generators,
            lower_triangular: scramble,
            powers,
        }
    }

    fn fill(&self, index: u64, out: &mut [f64]) {
        let p = self.base;
        let mut input = [0u64; 64];
        let mut n = index;
        let mut used = 0;
        while n > 0 {
            input[used] = n % p;
            n /= p;
            used += 1;
        }
        // the plain Pascal power is upper triangular: output rows past `used` are zero
        let rows = if self.lower_triangular { self.digits } else { used };
        for (j, slot) in out.iter_mut().enumerate() {
            let g = &self.generators[j];
            // integer numerator over p^rows, rounded once
            let mut numerator: u128 = 0;
            for r in 0..rows {
                let row = &g[r * self.digits..r * self.digits + used];
                let digit = row
                    .iter()
                    .zip(&input[..used])
                    .fold(0u64, |acc, (&c, &a)| acc + c as u64 * a)
                    % p;
                numerator = numerator * p as u128 + digit as u128;
            }
            *slot = numerator as f64 / self.powers[rows];
        }
    }
}

fn binomial_table_mod(n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n]; n];
    for k in 0..n {
        t[k][0] = 1;
        for r in 1..=k {
            t[k][r] = (t[k - 1][r - 1] + if r < k { t[k - 1][r] } else { 0 }) % p;
        }
    }
    t
}

fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let mut base = b % p;
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn mat_mul_mod(a: &[u64], b: &[u64], n: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; n * n];
    for r in 0..n {
        for k in 0..n {
            let a_rk = a[r * n + k];
            if a_rk == 0 {
                continue;
            }
            for c in 0..n {
                out[r * n + c] = (out[r * n + c] + a_rk * b[k * n + c]) % p;
            }
        }
    }
    out
}

/// A replayable, seekable stream of points.
///
/// Cloning is cheap; clones share the generator tables and own their cursor.
#[derive(Clone, Debug)]
pub struct PointStream {
    spec: SequenceSpec,
    cursor: u64,
    tables: Option<Arc<FaureTables>>,
}

impl PointStream {
    /// Stream positioned at index `spec.skip`.
    pub fn new(spec: SequenceSpec) -> Self {
        let tables = match spec.kind {
            SequenceKind::UniformPrng => None,
            _ => Some(Arc::new(FaureTables::new(&spec))),
        };
        Self {
            cursor: spec.skip,
            spec,
            tables,
        }
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn seek(&mut self, index: u64) {
        self.cursor = index;
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    /// The point at absolute index `index` (the skip is not applied).
    pub fn point_at(&self, index: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.spec.dimension);
        match &self.tables {
            Some(t) => t.fill(index, out),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
                // two 32-bit words per coordinate
                rng.set_word_pos(index as u128 * self.spec.dimension as u128 * 2);
                for slot in out.iter_mut() {
                    *slot = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
                }
            }
        }
    }

    /// Emits the point at the cursor and advances it.
    pub fn next_point(&mut self) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.dimension];
        self.point_at(self.cursor, &mut out);
        self.cursor += 1;
        out
    }
}

/// Balanced contiguous split of `[skip, skip + total)` into at most `workers` ranges.
///
/// Empty ranges are omitted when `workers > total`.
pub fn partition(spec: &SequenceSpec, workers: usize, total: u64) -> Result<Vec<IndexRange>> {
    if workers == 0 {
        return Err(Error::Usage("worker count must be positive".into()));
    }
    if total > 1 << 63 || spec.skip.checked_add(total).is_none() {
        return Err(Error::Usage(format!("point count {total} exceeds the index space")));
    }
    let w = workers as u64;
    let (base, extra) = (total / w, total % w);
    let mut start = spec.skip;
    let mut out = Vec::with_capacity(workers);
    for i in 0..w {
        let len = base + u64::from(i < extra);
        if len > 0 {
            out.push(IndexRange::new(start, len));
        }
        start += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(d: usize, kind: SequenceKind, seed: u64) -> PointStream {
        PointStream::new(SequenceSpec::new(d, kind, seed).unwrap())
    }

    #[test]
    fn bases_and_default_skip() {
        let s = SequenceSpec::new(6, SequenceKind::Faure, 0).unwrap();
        assert_eq!((s.base, s.skip), (7, 2401));
        let s = SequenceSpec::new(12, SequenceKind::Faure, 0).unwrap();
        assert_eq!((s.base, s.skip), (13, 28561));
        assert_eq!(SequenceSpec::new(1, SequenceKind::Faure, 0).unwrap().base, 2);
        assert_eq!(SequenceSpec::new(16, SequenceKind::Faure, 0).unwrap().base, 17);
        assert!(SequenceSpec::new(0, SequenceKind::Faure, 0).is_err());
        assert!(SequenceSpec::new(17, SequenceKind::Faure, 0).is_err());
    }

    #[test]
    fn van_der_corput_in_one_dimension() {
        let s = stream(1, SequenceKind::Faure, 0);
        let mut x = [0.0];
        for (i, want) in [(0, 0.0), (1, 0.5), (2, 0.25), (3, 0.75), (5, 0.625)] {
            s.point_at(i, &mut x);
            assert_eq!(x[0], want);
        }
    }

    #[test]
    fn first_coordinate_is_the_radical_inverse() {
        let s = stream(6, SequenceKind::Faure, 0);
        let mut x = [0.0; 6];
        for i in 0..7u64 {
            s.point_at(i, &mut x);
            assert_eq!(x[0], i as f64 / 7.0);
        }
        s.point_at(8, &mut x); // digits (1, 1)
        assert!((x[0] - (1.0 / 7.0 + 1.0 / 49.0)).abs() < 1e-16);
        // coordinate 1 uses the Pascal matrix: digits (1,1) -> (1+1, 1) = (2, 1)
        assert!((x[1] - (2.0 / 7.0 + 1.0 / 49.0)).abs() < 1e-16);
    }

    #[test]
    fn stream_starts_after_skip_and_stays_inside_open_cube() {
        for kind in [SequenceKind::Faure, SequenceKind::ScrambledFaure, SequenceKind::UniformPrng] {
            let mut s = stream(12, kind, 42);
            assert_eq!(s.cursor(), 28561);
            for _ in 0..2000 {
                let p = s.next_point();
                assert!(p.iter().all(|&v| v > 0.0 && v < 1.0), "{kind:?}: {p:?}");
            }
            assert_eq!(s.cursor(), 28561 + 2000);
        }
    }

    #[test]
    fn replay_is_deterministic() {
        for kind in [SequenceKind::Faure, SequenceKind::ScrambledFaure, SequenceKind::UniformPrng] {
            let a = stream(6, kind, 9);
            let b = stream(6, kind, 9);
            let (mut x, mut y) = ([0.0; 6], [0.0; 6]);
            for i in [0u64, 17, 2401, 99_999, 1 << 40] {
                a.point_at(i, &mut x);
                b.point_at(i, &mut y);
                assert_eq!(x, y);
            }
        }
        let mut a = stream(6, SequenceKind::ScrambledFaure, 1);
        let b = stream(6, SequenceKind::ScrambledFaure, 2);
        let mut y = [0.0; 6];
        b.point_at(a.cursor(), &mut y);
        assert_ne!(a.next_point(), y.to_vec());
    }

    #[test]
    fn handles_large_indices() {
        let s = stream(12, SequenceKind::ScrambledFaure, 3);
        let mut x = [0.0; 12];
        s.point_at((1u64 << 63) - 1, &mut x);
        assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn partition_examples() {
        let spec = SequenceSpec::new(6, SequenceKind::Faure, 0).unwrap();
        assert_eq!(partition(&spec, 1, 100).unwrap(), vec![IndexRange::new(2401, 100)]);
        let lens: Vec<u64> = partition(&spec, 3, 10).unwrap().iter().map(|r| r.len).collect();
        assert_eq!(lens, vec![4, 3, 3]);
        assert!(matches!(partition(&spec, 0, 10), Err(Error::Usage(_))));
        let parts = partition(&spec, 16, 5).unwrap();
        assert_eq!(parts.len(), 5);
        for w in [1, 2, 7, 16] {
            let parts = partition(&spec, w, 1001).unwrap();
            assert_eq!(parts[0].start, 2401);
            for pair in parts.windows(2) {
                assert_eq!(pair[0].end(), pair[1].start);
            }
            assert_eq!(parts.last().unwrap().end(), 2401 + 1001);
        }
    }

    #[test]
    fn product_integral_is_accurate() {
        let mut s = stream(6, SequenceKind::Faure, 0);
        let n = 1_000_000;
        let mut x = [0.0; 6];
        let mut sum = 0.0;
        for _ in 0..n {
            s.point_at(s.cursor(), &mut x);
            s.seek(s.cursor() + 1);
            sum += x.iter().product::<f64>();
        }
        let estimate = sum / n as f64;
        assert!((estimate - 1.0 / 64.0).abs() < 1e-4, "{estimate}");
    }

    #[test]
    fn scrambled_coordinates_pass_chi_square() {
        let s = stream(6, SequenceKind::ScrambledFaure, 77);
        let n = 100_000u64;
        let bins = 50;
        let mut counts = vec![vec![0u64; bins]; 6];
        let mut x = [0.0; 6];
        for i in 0..n {
            s.point_at(s.spec().skip + i, &mut x);
            for (j, &v) in x.iter().enumerate() {
                counts[j][((v * bins as f64) as usize).min(bins - 1)] += 1;
            }
        }
        let expected = n as f64 / bins as f64;
        // 99% quantile of chi-square with 49 degrees of freedom
        let critical = 74.92;
        for c in &counts {
            let chi2: f64 = c.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            assert!(chi2 < critical, "chi2 = {chi2}");
        }
    }

    /// Max deviation of the empirical measure from the volume over random anchored boxes.
    fn box_discrepancy(points: &[[f64; 6]], boxes: &[[f64; 6]]) -> f64 {
        boxes
            .iter()
            .map(|corner| {
                let volume: f64 = corner.iter().product();
                let inside = points
                    .iter()
                    .filter(|p| p.iter().zip(corner).all(|(a, b)| a < b))
                    .count();
                (inside as f64 / points.len() as f64 - volume).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn faure_beats_uniform_sampling_on_box_counts() {
        let n = 100_000;
        let take = |kind| {
            let mut s = stream(6, kind, 5);
            (0..n)
                .map(|_| {
                    let p = s.next_point();
                    std::array::from_fn(|j| p[j])
                })
                .collect::<Vec<[f64; 6]>>()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let boxes: Vec<[f64; 6]> = (0..1000)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.3f64..1.0)))
            .collect();
        let faure = box_discrepancy(&take(SequenceKind::Faure), &boxes);
        let prng = box_discrepancy(&take(SequenceKind::UniformPrng), &boxes);
        assert!(prng >= 3.0 * faure, "faure {faure:e}, prng {prng:e}");
    }
}
