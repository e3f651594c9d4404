use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_real(rng: &mut impl Rng) -> BlooreVector {
    BlooreVector::real(std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)))
}

fn random_complex(rng: &mut impl Rng) -> BlooreVector {
    loop {
        let z: [Complex64; 6] =
            std::array::from_fn(|_| c(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)));
        if z.iter().all(|v| v.norm_sqr() <= 1.0) {
            return BlooreVector::complex(z);
        }
    }
}

/// Complex states are rare in the cube; shrink toward the identity until positive.
fn random_complex_state(rng: &mut impl Rng) -> BlooreVector {
    let z = random_complex(rng);
    let mut scale = 1.0;
    loop {
        let v = BlooreVector::complex(z.entries().map(|x| x * scale));
        if is_density(&v) {
            return v;
        }
        scale *= 0.8;
    }
}

fn random_diagonal_with_ratio(rng: &mut impl Rng, mu: f64) -> DiagonalVector {
    // pick ρ11, ρ22, ρ33 freely, solve ρ44 = μ² ρ22 ρ33 / ρ11, then normalize (ratio is scale-free)
    let a: f64 = rng.gen_range(0.05..1.0);
    let b: f64 = rng.gen_range(0.05..1.0);
    let cc: f64 = rng.gen_range(0.05..1.0);
    let d = mu * mu * b * cc / a;
    let t = a + b + cc + d;
    DiagonalVector::new([a / t, b / t, cc / t, d / t]).unwrap()
}

#[test]
fn factor_b_examples() {
    assert_eq!(factor_b(&BlooreVector::zeros()), 1.0);
    assert_eq!(factor_b(&BlooreVector::real([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])), 0.0);
}

#[test]
fn factor_b_complex_reduces_to_real_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let z = random_real(&mut rng);
        let as_complex = BlooreVector {
            z: *z.entries(),
            real: false,
        };
        assert_relative_eq!(factor_b(&z), factor_b(&as_complex), epsilon = 1e-12);
    }
}

proptest! {
    #[test]
    fn factor_b_matches_dense_determinant(z in prop::array::uniform6(-1.0f64..=1.0)) {
        let v = BlooreVector::real(z);
        let direct = det4(&v.unit_matrix()).re;
        prop_assert!((factor_b(&v) - direct).abs() < 1e-12);
    }

    #[test]
    fn minor3_matches_dense_determinant(z in prop::array::uniform6(-1.0f64..=1.0), pick in 0usize..4) {
        let v = BlooreVector::real(z);
        let triple: Vec<usize> = (0..4).filter(|&i| i != pick).collect();
        let which = [triple[0], triple[1], triple[2]];
        let m = std::array::from_fn(|r| std::array::from_fn(|s| v.get(which[r], which[s])));
        prop_assert!((minor3(&v, which).unwrap() - det3(&m).re).abs() < 1e-12);
    }

    #[test]
    fn real_quartic_has_nonpositive_ends(z in prop::array::uniform6(-1.0f64..=1.0)) {
        let q = MuQuartic::real(z);
        prop_assert!(q.coeffs[0] <= 0.0);
        prop_assert!(q.coeffs[4] <= 0.0);
    }
}

#[test]
fn minor3_examples_and_errors() {
    assert_eq!(minor3(&BlooreVector::zeros(), [0, 1, 2]).unwrap(), 1.0);
    assert_eq!(minor3(&BlooreVector::zeros(), [1, 2, 3]).unwrap(), 1.0);
    let ones = BlooreVector::real([1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    assert_eq!(minor3(&ones, [0, 1, 2]).unwrap(), 0.0);
    assert!(matches!(minor3(&ones, [0, 0, 2]), Err(Error::Usage(_))));
    assert!(matches!(minor3(&ones, [0, 1, 4]), Err(Error::Usage(_))));
}

#[test]
fn is_density_examples() {
    assert!(is_density(&BlooreVector::zeros()));
    let bad = BlooreVector::real([1.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
    assert!(!is_density(&bad));
    let eig = eigen_oracle(&reconstruct(&bad, &DiagonalVector::new([0.25; 4]).unwrap())).unwrap();
    assert!(eig[0] < 0.0);
    assert!(factor_b(&bad) < 0.0);
    // outside the unit box
    assert!(!is_density(&BlooreVector::complex([
        c(0.8, 0.8),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0)
    ])));
}

#[test]
fn is_density_agrees_with_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let uniform = DiagonalVector::new([0.25; 4]).unwrap();
    let mut checked = 0;
    for i in 0..100_000 {
        let z = if i % 2 == 0 {
            random_real(&mut rng)
        } else {
            random_complex(&mut rng)
        };
        let min_eig = eigen_oracle(&reconstruct(&z, &uniform)).unwrap()[0];
        if min_eig.abs() < 1e-10 {
            continue;
        }
        assert_eq!(is_density(&z), min_eig > 0.0, "z = {z:?}, λmin = {min_eig}");
        checked += 1;
    }
    assert!(checked > 99_000);
}

#[test]
fn cad_box_examples() {
    let b = cad_box(0.0, 0.0, 0.0, 0.0, 0.0);
    for iv in [b.z23, b.z24, b.z34] {
        assert_eq!((iv.lo, iv.hi), (-1.0, 1.0));
    }
    let b = cad_box(1.0, 0.0, 0.3, 0.0, 0.3);
    assert_eq!((b.z23.lo, b.z23.hi), (0.0, 0.0));
    assert!(b.degenerate);
}

#[test]
fn cad_box_interior_points_are_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100_000 {
        let z12 = rng.gen_range(-1.0..=1.0);
        let z13 = rng.gen_range(-1.0..=1.0);
        let z14 = rng.gen_range(-1.0..=1.0);
        let b = cad_box(z12, z13, z14, 0.0, 0.0);
        let z23 = rng.gen_range(b.z23.lo..=b.z23.hi);
        let z24 = rng.gen_range(b.z24.lo..=b.z24.hi);
        let inner = cad_box(z12, z13, z14, z23, z24);
        assert!(inner.z34.lo <= inner.z34.hi + 1e-10);
        let z34 = if inner.z34.width() > 0.0 {
            rng.gen_range(inner.z34.lo..=inner.z34.hi)
        } else {
            inner.z34.lo
        };
        for iv in [inner.z23, inner.z24, inner.z34] {
            assert!(iv.lo >= -1.0 - 1e-10 && iv.hi <= 1.0 + 1e-10);
        }
        let z = BlooreVector::real([z12, z13, z14, z23, z24, z34.clamp(-1.0, 1.0)]);
        let slack = 1e-10;
        let near_edge = [
            inner.z23.edge_distance(z23),
            inner.z24.edge_distance(z24),
            inner.z34.edge_distance(z34),
        ]
        .iter()
        .any(|&d| d < slack);
        if !near_edge {
            assert!(is_density(&z), "{z:?}");
        }
    }
}

#[test]
fn cube_points_outside_cad_box_are_not_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut outside = 0;
    while outside < 100_000 {
        let z = random_real(&mut rng).real_parts();
        let b = cad_box(z[0], z[1], z[2], z[3], z[4]);
        if b.contains(z[3], z[4], z[5], 0.0) {
            continue;
        }
        outside += 1;
        let near = [b.z23.edge_distance(z[3]), b.z24.edge_distance(z[4]), b.z34.edge_distance(z[5])]
            .iter()
            .any(|&d| d < 1e-10);
        if !near {
            assert!(!is_density(&BlooreVector::real(z)), "{z:?}");
        }
    }
}

#[test]
fn representative_diagonal_examples() {
    let d = representative_diagonal(DiagonalRatio::new(1.0).unwrap());
    assert_eq!(d.entries(), [0.25; 4]);
    let d = representative_diagonal(DiagonalRatio::new(0.5).unwrap()).entries();
    assert_relative_eq!(d[0], 1.0 / 6.0, epsilon = 1e-16);
    assert_relative_eq!(d[1], 1.0 / 3.0, epsilon = 1e-16);
    assert_relative_eq!(d[2], 1.0 / 3.0, epsilon = 1e-16);
    assert_relative_eq!(d[3], 1.0 / 6.0, epsilon = 1e-16);
    assert!(matches!(DiagonalRatio::new(0.0), Err(Error::Domain(_))));
    assert!(matches!(DiagonalRatio::new(-2.0), Err(Error::Domain(_))));
}

proptest! {
    #[test]
    fn representative_diagonal_recovers_ratio(mu in 1e-3f64..1e3) {
        let d = representative_diagonal(DiagonalRatio::new(mu).unwrap());
        prop_assert!((d.entries().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        prop_assert!((d.ratio() - mu).abs() <= 1e-14 * mu.max(1.0));
    }
}

#[test]
fn ptdet_q_examples() {
    let half = DiagonalRatio::new(0.5).unwrap();
    assert_eq!(ptdet_q(&BlooreVector::zeros(), half), 0.25);
    let z14 = BlooreVector::real([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(ptdet_q(&z14, DiagonalRatio::new(1.0).unwrap()), 0.0);
}

#[test]
fn ptdet_q_real_formula_matches_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20_000 {
        let z = random_real(&mut rng);
        let mu = DiagonalRatio::new(rng.gen_range(0.01..3.0)).unwrap();
        let explicit = ptdet_q(&z, mu);
        let dense = ptdet_ratio(&z, &representative_diagonal(mu));
        assert!((explicit - dense).abs() < 1e-10, "{explicit} vs {dense}");
    }
}

#[test]
fn ptdet_ratio_depends_on_diagonal_only_through_mu() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10_000 {
        let z = if i % 2 == 0 {
            random_real(&mut rng)
        } else {
            random_complex(&mut rng)
        };
        let mu = rng.gen_range(0.05..3.0);
        let d = random_diagonal_with_ratio(&mut rng, mu);
        let q = ptdet_q(&z, DiagonalRatio::new(d.ratio()).unwrap());
        let general = ptdet_ratio(&z, &d);
        let scale = MuQuartic::real([1.0; 6]).coeffs.len() as f64 * mu.max(1.0).powi(4);
        assert!((q - general).abs() <= 1e-10 * scale, "{q} vs {general}");
    }
}

#[test]
fn mu_quartic_examples() {
    assert_eq!(
        mu_quartic(&BlooreVector::zeros()).unwrap().coeffs,
        [0.0, 0.0, 1.0, 0.0, 0.0]
    );
    let q = mu_quartic(&BlooreVector::real([0.0, 0.0, 0.5, 0.25, 0.0, 0.0])).unwrap();
    assert_eq!(q.coeffs[4], -0.25);
    assert_eq!(q.coeffs[0], -0.0625);
}

#[test]
fn complex_quartic_reproduces_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let z = random_complex(&mut rng);
        let q = mu_quartic(&z).unwrap();
        let mu = DiagonalRatio::new(0.77).unwrap();
        let direct = ptdet_q(&z, mu);
        assert!((q.eval(0.77) - direct).abs() < 1e-9, "{} vs {direct}", q.eval(0.77));
        // the modulus-squared terms survive as end coefficients
        assert!((q.coeffs[4] + z.entries()[2].norm_sqr()).abs() < 1e-9);
        assert!((q.coeffs[0] + z.entries()[3].norm_sqr()).abs() < 1e-9);
    }
}

#[test]
fn complex_quartic_of_real_entries_matches_explicit_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let z = random_real(&mut rng);
        let as_complex = BlooreVector {
            z: *z.entries(),
            real: false,
        };
        let explicit = MuQuartic::real(z.real_parts());
        let fitted = mu_quartic(&as_complex).unwrap();
        for k in 0..5 {
            assert!((explicit.coeffs[k] - fitted.coeffs[k]).abs() < 1e-10);
        }
    }
}

#[test]
fn separable_mu_set_examples() {
    assert_eq!(separable_mu_set(&BlooreVector::zeros()).unwrap(), vec![(0.0, 1.0)]);
    let z14 = BlooreVector::real([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(separable_mu_set(&z14).unwrap(), vec![(0.0, 1.0)]);
    let bad = BlooreVector::real([1.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
    assert!(separable_mu_set(&bad).unwrap().is_empty());
    assert!(matches!(
        separable_mu_set_on(&z14, 0.5, 0.2),
        Err(Error::Usage(_))
    ));
}

#[test]
fn separable_mu_set_matches_sign_of_q() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut states = 0;
    let mut max_components = 0;
    while states < 100_000 {
        let z = if states % 10 == 0 {
            random_complex_state(&mut rng)
        } else {
            random_real(&mut rng)
        };
        if !is_density(&z) {
            continue;
        }
        states += 1;
        let set = separable_mu_set(&z).unwrap();
        max_components = max_components.max(set.len());
        assert!(set.len() <= 3);
        let q = mu_quartic(&z).unwrap();
        let mut shifted = q.coeffs;
        shifted[0] += BOUNDARY_TOL;
        let roots = roots::real_roots_in(&shifted, 0.0, 1.0);
        for _ in 0..50 {
            let mu: f64 = rng.gen_range(0.0..=1.0);
            if roots.iter().any(|r| (r - mu).abs() < 1e-9) {
                continue;
            }
            let inside = set.iter().any(|&(a, b)| mu >= a && mu <= b);
            let direct = mu == 0.0 || ptdet_q(&z, DiagonalRatio::new(mu).unwrap()) >= -BOUNDARY_TOL;
            assert_eq!(inside, direct, "z={z:?} mu={mu} set={set:?}");
        }
    }
    assert!(max_components >= 1);
}

#[test]
fn is_separable_examples() {
    for mu in [0.01, 0.5, 1.0, 3.0] {
        assert!(is_separable(&BlooreVector::zeros(), DiagonalRatio::new(mu).unwrap()));
    }
    let bell = BlooreVector::complex([
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    ]);
    assert!(is_separable(&bell, DiagonalRatio::new(1.0).unwrap()));
    assert!(is_separable(&bell, DiagonalRatio::new(0.999_999).unwrap()));
}

#[test]
fn is_separable_agrees_with_partial_transpose_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for i in 0..20_000 {
        let z = if i % 2 == 0 {
            random_real(&mut rng)
        } else {
            random_complex_state(&mut rng)
        };
        let mu = DiagonalRatio::new(rng.gen_range(0.02..=1.0)).unwrap();
        let rho = reconstruct(&z, &representative_diagonal(mu));
        let eig = eigen_oracle(&rho).unwrap();
        let pt = eigen_oracle(&rho.partial_transpose()).unwrap();
        if eig[0].abs() < 1e-10 || pt[0].abs() < 1e-10 {
            continue;
        }
        let oracle = eig[0] > 0.0 && pt[0] > 0.0;
        assert_eq!(is_separable(&z, mu), oracle, "{z:?} μ={}", mu.value());
        checked += 1;
    }
    assert!(checked > 19_000);
}

#[test]
fn eigen_oracle_examples() {
    let id = reconstruct(&BlooreVector::zeros(), &DiagonalVector::new([0.25; 4]).unwrap());
    assert_eq!(eigen_oracle(&id).unwrap(), [0.25; 4]);
    let d = representative_diagonal(DiagonalRatio::new(0.5).unwrap());
    let eig = eigen_oracle(&reconstruct(&BlooreVector::zeros(), &d)).unwrap();
    let want = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0];
    for (a, b) in eig.iter().zip(want) {
        assert_relative_eq!(*a, b, epsilon = 1e-15);
    }
}

#[test]
fn swap_maps_mu_to_its_reciprocal() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..10_000 {
        let z = if i % 2 == 0 {
            random_real(&mut rng)
        } else {
            random_complex_state(&mut rng)
        };
        let mu = rng.gen_range(0.05..=1.0);
        let d = representative_diagonal(DiagonalRatio::new(mu).unwrap());
        let rho = reconstruct(&z, &d);
        let swapped = reconstruct(&z.swapped(), &d.swapped());
        assert_relative_eq!(d.swapped().ratio(), 1.0 / mu, max_relative = 1e-14);
        let permuted = rho.permuted([1, 0, 3, 2]);
        for r in 0..4 {
            for s in 0..4 {
                assert!((permuted.get(r, s) - swapped.get(r, s)).norm() < 1e-15);
            }
        }
        // relabelling is a local unitary, so det(ρ_PT) is preserved; the
        // (ρ22 ρ33)² normalizer picks up a factor μ⁴ from the swapped diagonal
        let q = ptdet_q(&z, DiagonalRatio::new(mu).unwrap());
        let q_swapped = ptdet_q(&z.swapped(), DiagonalRatio::new(1.0 / mu).unwrap());
        assert!((q - q_swapped * mu.powi(4)).abs() < 1e-10, "{q} vs {q_swapped}");
        if q.abs() > 1e-9 {
            assert_eq!(
                is_separable(&z, DiagonalRatio::new(mu).unwrap()),
                is_separable(&z.swapped(), DiagonalRatio::new(1.0 / mu).unwrap())
            );
        }
    }
}
