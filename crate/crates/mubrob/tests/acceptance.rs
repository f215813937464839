//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line. Tolerances are pinned to the published reference values.

use mubrob::analysis::{qubit_eta2, qubit_eta3, random_unit_bloch, scan_subsets};
use mubrob::bounds::{
    alpha3_closed_form, compute_lambda_opts, eta_low_recursive, eta_up_charpoly_k4,
    eta_up_rank1, LambdaOptions,
};
use mubrob::linalg::{real_poly_roots, C64};
use mubrob::mub::{
    build_for_dim, build_mub_tensor_triple, to_measurements, verify_unbiased, MeasurementSet,
};
use mubrob::parent::{check_parent, eta_sequence_closed_form, parent_guess, parent_sequence};
use mubrob::robustness::{robustness, RobustnessOptions};
use mubrob::sdp::{build_primal, solve_sdp};
use rand::{Rng, SeedableRng};

fn first_k(d: u64, k: usize) -> MeasurementSet {
    let m = if d == 6 {
        build_mub_tensor_triple(2, 3).unwrap()
    } else {
        build_for_dim(d).unwrap()
    };
    to_measurements(&m, &(0..k).collect::<Vec<_>>()).unwrap()
}

fn subset(d: u64, indices: &[usize]) -> MeasurementSet {
    let m = if d == 6 {
        build_mub_tensor_triple(2, 3).unwrap()
    } else {
        build_for_dim(d).unwrap()
    };
    to_measurements(&m, indices).unwrap()
}

/// run a criterion, print exactly one line, and propagate failure
fn criterion(id: u32, label: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {id} [{label}]: PASS"),
        Err(msg) => {
            println!("criterion {id} [{label}]: FAIL — {msg}");
            panic!("criterion {id} failed: {msg}");
        }
    }
}

fn expect(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

#[test]
fn criterion_01_closed_form_upper_bounds() {
    criterion(1, "closed-form upper bounds", || {
        let s = |x: f64| x.sqrt();
        let pi = std::f64::consts::PI;
        // (d, k, subset, analytic value)
        let mut cells: Vec<(u64, Vec<usize>, f64)> = Vec::new();
        for d in 2..=7u64 {
            let df = d as f64;
            cells.push((d, vec![0, 1], (df - 2.0 + s(df)) / (2.0 * (df - 1.0))));
        }
        cells.push((2, vec![0, 1, 2], 1.0 / s(3.0)));
        cells.push((3, vec![0, 1, 2], (pi / 18.0).cos() / s(3.0)));
        cells.push((5, vec![0, 1, 2], (13.0 - s(5.0) + s(30.0 * (5.0 + s(5.0)))) / 48.0));
        cells.push((5, vec![0, 1, 3], (1.0 + s(5.0)) / 6.0));
        cells.push((3, vec![0, 1, 2, 3], (1.0 + 3.0 * s(5.0)) / 16.0));
        cells.push((4, vec![0, 1, 2, 3], 0.5));
        cells.push((4, vec![0, 1, 2, 3, 4], (3.0 + 2.0 * s(3.0)) / 15.0));
        for (d, sub, want) in cells {
            let got = eta_up_rank1(&subset(d, &sub)).map_err(|e| e.to_string())?.value;
            expect(
                (got - want).abs() < 1e-9,
                format!("d={d} subset {sub:?}: eta_up {got} vs {want}"),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_02_sdp_values() {
    criterion(2, "SDP values", || {
        let opts = RobustnessOptions { allow_certificate: false, ..Default::default() };
        let plain: [(u64, usize, f64); 4] =
            [(4, 3, 0.5469), (5, 4, 0.4615), (7, 3, 0.5101), (6, 3, 0.5204)];
        for (d, k, want) in plain {
            let rep = robustness(&first_k(d, k), &opts).map_err(|e| e.to_string())?;
            expect(
                (rep.eta - want).abs() < 5e-4,
                format!("d={d} k={k}: eta {} vs {want}", rep.eta),
            )?;
        }
        // d=7, k=4: the non-tight quadruplet (the cluster with the lower
        // eta_up) has eta* = 0.4436
        let scan = scan_subsets(7, 4, false, 1e-6).map_err(|e| e.to_string())?;
        let rec = scan
            .records
            .iter()
            .min_by(|a, b| a.eta_up.partial_cmp(&b.eta_up).unwrap())
            .unwrap();
        let rep = robustness(&subset(7, &rec.indices), &opts).map_err(|e| e.to_string())?;
        expect(
            (rep.eta - 0.4436).abs() < 5e-4,
            format!("d=7 k=4 subset {:?}: eta {} vs 0.4436", rec.indices, rep.eta),
        )
    });
}

#[test]
fn criterion_03_certificate_tightness() {
    criterion(3, "certificate tightness", || {
        for d in 2..=5u64 {
            for k in [d as usize, d as usize + 1] {
                let m = first_k(d, k);
                let g = parent_guess(&m, 1e-8)
                    .map_err(|e| format!("guess failed at d={d} k={k}: {e}"))?;
                let eta = check_parent(&g, &m)
                    .map_err(|e| format!("verify failed at d={d} k={k}: {e}"))?;
                let up = eta_up_rank1(&m).map_err(|e| e.to_string())?.value;
                expect(
                    (eta - up).abs() < 1e-7,
                    format!("d={d} k={k}: parent eta {eta} vs eta_up {up}"),
                )?;
            }
        }
        // d=9, k=3: some triple's educated guess fails, yet its eta* (SDP)
        // still meets its own upper bound
        let bases = build_for_dim(9).unwrap();
        let mut failing: Option<Vec<usize>> = None;
        'outer: for a in 0..10 {
            for b in (a + 1)..10 {
                for c in (b + 1)..10 {
                    let m = to_measurements(&bases, &[a, b, c]).unwrap();
                    let ok = parent_guess(&m, 1e-8)
                        .and_then(|g| check_parent(&g, &m))
                        .is_ok();
                    if !ok {
                        failing = Some(vec![a, b, c]);
                        break 'outer;
                    }
                }
            }
        }
        let sub = failing.ok_or("no failing d=9 triple found".to_string())?;
        let m = to_measurements(&bases, &sub).unwrap();
        let up = eta_up_rank1(&m).map_err(|e| e.to_string())?.value;
        let opts = RobustnessOptions { allow_certificate: false, ..Default::default() };
        let rep = robustness(&m, &opts).map_err(|e| e.to_string())?;
        expect(
            (rep.eta - up).abs() < 5e-4,
            format!("d=9 subset {sub:?}: sdp {} vs eta_up {up}", rep.eta),
        )
    });
}

#[test]
fn criterion_04_lower_bound_table() {
    criterion(4, "recursive lower-bound table", || {
        let table: [(usize, &[f64]); 6] = [
            (2, &[0.7071, 0.5774]),
            (3, &[0.6830, 0.5468, 0.4672]),
            (4, &[0.6667, 0.5263, 0.4455, 0.3918]),
            (5, &[0.6545, 0.5113, 0.4297, 0.3758, 0.3371]),
            (6, &[0.6449, 0.4996, 0.4175, 0.3636, 0.3250, 0.2958]),
            (7, &[0.6371, 0.4902, 0.4076, 0.3537, 0.3153, 0.2863, 0.2634]),
        ];
        for (d, col) in table {
            for (i, &want) in col.iter().enumerate() {
                let k = i + 2;
                let rep = eta_low_recursive(k, d).map_err(|e| e.to_string())?;
                expect(
                    (rep.value - want).abs() < 1e-4,
                    format!("(k={k}, d={d}): {} vs {want}", rep.value),
                )?;
                let alphas = rep.alphas.ok_or("missing alphas".to_string())?;
                expect(
                    (alphas[0] - 1.0).abs() < 1e-9,
                    format!("(k={k}, d={d}): alpha2 {} != 1", alphas[0]),
                )?;
                if k >= 3 {
                    let a3 = alpha3_closed_form(d);
                    expect(
                        (alphas[1] - a3).abs() < 1e-9,
                        format!("(k={k}, d={d}): alpha3 {} vs {a3}", alphas[1]),
                    )?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_05_charpoly_quadruplet_bound() {
    criterion(5, "characteristic-polynomial k=4 bound", || {
        let b6 = eta_up_charpoly_k4(6).map_err(|e| e.to_string())?;
        expect(
            (b6.lambda.unwrap() - 2.183).abs() < 1e-3,
            format!("d=6 lambda {}", b6.lambda.unwrap()),
        )?;
        expect((b6.value - 0.4550).abs() < 1e-3, format!("d=6 eta {}", b6.value))?;
        let b10 = eta_up_charpoly_k4(10).map_err(|e| e.to_string())?;
        expect((b10.value - 0.4213).abs() < 1e-3, format!("d=10 eta {}", b10.value))?;
        let l6 = eta_low_recursive(4, 6).map_err(|e| e.to_string())?.value;
        let l10 = eta_low_recursive(4, 10).map_err(|e| e.to_string())?.value;
        expect((l6 - 0.4175).abs() < 1e-4, format!("d=6 eta_low {l6}"))?;
        expect((l10 - 0.3864).abs() < 1e-4, format!("d=10 eta_low {l10}"))
    });
}

#[test]
fn criterion_06_analytic_robustness_values() {
    criterion(6, "analytic robustness values", || {
        let s = |x: f64| x.sqrt();
        let pi = std::f64::consts::PI;
        let opts = RobustnessOptions::default();
        // certificate-path cells, matched to 1e-9
        let tight: Vec<(u64, Vec<usize>, f64)> = vec![
            (5, vec![0, 1, 3], (1.0 + s(5.0)) / 6.0),
            (5, vec![0, 1, 2], (13.0 - s(5.0) + s(30.0 * (5.0 + s(5.0)))) / 48.0),
            (3, vec![0, 1, 2], (pi / 18.0).cos() / s(3.0)),
            (3, vec![0, 1, 2, 3], (1.0 + 3.0 * s(5.0)) / 16.0),
            (4, vec![0, 1, 2, 3, 4], (3.0 + 2.0 * s(3.0)) / 15.0),
            (9, vec![0, 1, 2, 3, 4, 5], (3.0 + s(7.0)) / 16.0),
        ];
        for (d, sub, want) in tight {
            let rep = robustness(&subset(d, &sub), &opts).map_err(|e| e.to_string())?;
            expect(
                format!("{:?}", rep.method) == "Certificate",
                format!("d={d} {sub:?}: expected certificate path, got {:?}", rep.method),
            )?;
            expect(
                (rep.eta - want).abs() < 1e-9,
                format!("d={d} {sub:?}: eta {} vs {want}", rep.eta),
            )?;
        }
        // d=9, k=4: (8+3sqrt3)/32 at the cluster with the smallest eta_up
        let scan = scan_subsets(9, 4, false, 1e-6).map_err(|e| e.to_string())?;
        let rec = scan
            .records
            .iter()
            .min_by(|a, b| a.eta_up.partial_cmp(&b.eta_up).unwrap())
            .unwrap();
        let rep = robustness(&subset(9, &rec.indices), &opts).map_err(|e| e.to_string())?;
        let want94 = (8.0 + 3.0 * s(3.0)) / 32.0;
        expect(
            (rep.eta - want94).abs() < 1e-9,
            format!("d=9 k=4 {:?}: eta {} vs {want94}", rec.indices, rep.eta),
        )?;
        // d=7, k=7: largest root of 56 X^3 - 28 X^2 + 1
        let roots = real_poly_roots(&[1.0, 0.0, -28.0, 56.0]).map_err(|e| e.to_string())?;
        let want77 = roots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rep = robustness(&first_k(7, 7), &opts).map_err(|e| e.to_string())?;
        expect(
            (rep.eta - want77).abs() < 1e-9,
            format!("d=7 k=7: eta {} vs root {want77}", rep.eta),
        )?;
        // d=8, k=9 (complete set): the tuple scan needs a raised budget
        let m = first_k(8, 9);
        let lam_opts = LambdaOptions { budget: 20_000_000, ..Default::default() };
        let lam = compute_lambda_opts(&m, &lam_opts).map_err(|e| e.to_string())?;
        let g = mubrob::parent::parent_guess_from_lambda(&m, &lam, 1e-8)
            .map_err(|e| e.to_string())?;
        let eta = check_parent(&g, &m).map_err(|e| e.to_string())?;
        let want89 = (3.0 + 2.0 * s(3.0)) / 21.0;
        expect(
            (eta - want89).abs() < 1e-9,
            format!("d=8 k=9: eta {eta} vs {want89}"),
        )
    });
}

#[test]
fn criterion_07_parent_sequence_closed_forms() {
    criterion(7, "parent-sequence closed forms", || {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let d = rng.gen_range(2..=5u64);
            let k = rng.gen_range(2..=(d as usize + 1));
            // random k-subset of the d+1 bases
            let mut idx: Vec<usize> = (0..(d as usize + 1)).collect();
            for i in 0..k {
                let j = rng.gen_range(i..idx.len());
                idx.swap(i, j);
            }
            let mut sub: Vec<usize> = idx[..k].to_vec();
            sub.sort_unstable();
            let m = subset(d, &sub);
            for n in 1..=4u32 {
                let g = parent_sequence(&m, n).map_err(|e| e.to_string())?;
                let eta = check_parent(&g, &m).map_err(|e| e.to_string())?;
                let want = eta_sequence_closed_form(n, k, d as usize)
                    .ok_or("missing closed form".to_string())?;
                expect(
                    (eta - want).abs() < 1e-8,
                    format!("trial {trial} d={d} subset {sub:?} n={n}: {eta} vs {want}"),
                )?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_08_table2_cluster_counts() {
    criterion(8, "inequivalent-set counts", || {
        let start = std::time::Instant::now();
        let cells: [(u64, usize, usize); 17] = [
            (2, 3, 1),
            (3, 3, 1),
            (3, 4, 1),
            (4, 3, 1),
            (4, 4, 1),
            (5, 3, 2),
            (5, 4, 1),
            (7, 3, 1),
            (7, 4, 2),
            (8, 3, 1),
            (8, 4, 1),
            (9, 3, 2),
            (9, 4, 3),
            (11, 3, 1),
            (11, 4, 2),
            (13, 3, 2),
            (13, 4, 4),
        ];
        for (d, k, want) in cells {
            let scan = scan_subsets(d, k, false, 1e-6).map_err(|e| e.to_string())?;
            expect(
                scan.distinct == want,
                format!("d={d} k={k}: {} clusters vs {want}", scan.distinct),
            )?;
        }
        expect(
            start.elapsed().as_secs() < 1800,
            format!("runtime {}s over budget", start.elapsed().as_secs()),
        )
    });
}

#[test]
fn criterion_09_qubit_optimality_sampling() {
    criterion(9, "qubit optimality sampling", || {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let b2 = 1.0 / 2f64.sqrt();
        let b3 = 1.0 / 3f64.sqrt();
        for _ in 0..100_000 {
            let a = random_unit_bloch(&mut rng);
            let b = random_unit_bloch(&mut rng);
            let e2 = qubit_eta2(a, b);
            expect(e2 >= b2 - 1e-12, format!("eta2 {e2} below bound"))?;
            // equality only at orthogonal pairs: eta2 - b2 ~ b2 (a.b)^2 / 8,
            // so eta within 1e-8 of the bound forces |a.b| < 3.4e-4
            if (e2 - b2).abs() < 1e-8 {
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                expect(dot.abs() < 1e-3, format!("eta2 minimal at non-orthogonal pair"))?;
            }
            let c = random_unit_bloch(&mut rng);
            let e3 = qubit_eta3(a, b, c);
            expect(e3 >= b3 - 1e-12, format!("eta3 {e3} below bound"))?;
            if (e3 - b3).abs() < 1e-8 {
                for (u, v) in [(a, b), (a, c), (b, c)] {
                    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                    expect(
                        dot.abs() < 1e-3,
                        format!("eta3 minimal at non-orthonormal triple"),
                    )?;
                }
            }
        }
        // the orthonormal frames attain the bounds exactly
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        let z = [0.0, 0.0, 1.0];
        expect((qubit_eta2(x, y) - b2).abs() < 1e-12, "orthogonal pair".into())?;
        expect((qubit_eta3(x, y, z) - b3).abs() < 1e-12, "orthonormal triple".into())
    });
}

#[test]
fn criterion_10_property_suite() {
    criterion(10, "value-independent properties", || {
        let start = std::time::Instant::now();
        // unbiasedness of every standard construction with prime-power d <= 32
        for d in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32] {
            let m = build_for_dim(d).map_err(|e| e.to_string())?;
            let rep = verify_unbiased(&m, 1e-10);
            expect(rep.pass, format!("d={d}: max deviation {}", rep.max_deviation))?;
        }
        // POVM completeness of the derived measurements
        for d in [2u64, 5, 9, 16] {
            let m = first_k(d, 3);
            expect(
                m.completeness_deviation() < 1e-10,
                format!("d={d}: completeness {}", m.completeness_deviation()),
            )?;
        }
        // weak duality and the analytic sandwich on small instances
        for (d, k) in [(2u64, 2usize), (2, 3), (3, 2), (3, 3)] {
            let m = first_k(d, k);
            let p = build_primal(&m).map_err(|e| e.to_string())?;
            let sol = solve_sdp(&p, 1e-8).map_err(|e| e.to_string())?;
            expect(sol.gap.abs() < 1e-6, format!("(d={d},k={k}): gap {}", sol.gap))?;
            let eta = sol.eta();
            let low = eta_low_recursive(k, d as usize).map_err(|e| e.to_string())?.value;
            let up = eta_up_rank1(&m).map_err(|e| e.to_string())?.value;
            expect(
                low - 1e-6 <= eta && eta <= up + 1e-6,
                format!("(d={d},k={k}): sandwich {low} <= {eta} <= {up} violated"),
            )?;
        }
        // steering identity at several noise levels, maximally entangled state
        for (d, k) in [(3u64, 4usize), (4, 3)] {
            let m = first_k(d, k);
            let dd = d as usize;
            let mut psi = vec![C64::new(0.0, 0.0); dd * dd];
            for i in 0..dd {
                psi[i * dd + i] = C64::new(1.0 / (dd as f64).sqrt(), 0.0);
            }
            for eta in [0.0, 0.37, 1.0] {
                let dev = mubrob::analysis::steering_identity_check(&psi, &m, eta)
                    .map_err(|e| e.to_string())?;
                expect(dev <= 1e-12, format!("(d={d},k={k},eta={eta}): deviation {dev}"))?;
            }
        }
        expect(
            start.elapsed().as_secs() < 300,
            format!("runtime {}s over budget", start.elapsed().as_secs()),
        )
    });
}
