//! Acceptance checks, one line per criterion. Exits non-zero on any failure.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use rand::Rng;
use sympcascade::linalg::{
    default_rank_tol, is_lower_block_triangular, max_above_block_diagonal, prefix_rank_flags,
    skew_gram, symplectic_residual,
};
use sympcascade::qsys::{
    cascade_realize, check_physical_realizability, default_frequency_grid, relative_deviation,
    sdh_to_quadrature, series_product, transfer_function, transform, verify_cascade,
    CascadeOptions,
};
use sympcascade::realjordan::{
    check_admissibility, check_admissibility_over_permutations, SearchOptions,
};
use sympcascade::sympqr::symplectic_qr;
use sympcascade::sympschur::symplectic_schur;
use sympcascade::{Error, RealMatrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn max_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (a - b).amax()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn criterion1() -> Outcome {
    let v = fixture_matrix("integer_basis_V.json");
    let (qr, elapsed) = timed(|| symplectic_qr(&v, default_rank_tol(4)));
    let qr = qr.map_err(|e| e.to_string())?;
    let ds = max_diff(&qr.s, &expected_matrix("integer_basis_S"));
    let dy = max_diff(&qr.y, &expected_matrix("integer_basis_Y"));
    ensure(
        ds <= 1e-3 && dy <= 1e-3,
        format!("S off by {ds:.2e}, Y off by {dy:.2e}"),
    )?;
    ensure(
        elapsed < Duration::from_millis(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("max |ΔS| {ds:.1e}, max |ΔY| {dy:.1e}, {elapsed:?}"))
}

fn criterion2() -> Outcome {
    let v = fixture_matrix("skew_orthogonal_V.json");
    let err = symplectic_qr(&v, default_rank_tol(4)).err();
    ensure(
        err == Some(Error::RankDeficientPrefix(1)),
        format!("got {err:?}"),
    )?;
    let flags = prefix_rank_flags(&v, default_rank_tol(4)).map_err(|e| e.to_string())?;
    let n1 = skew_gram(&v, 1).map_err(|e| e.to_string())?;
    ensure(!flags[0], "N_1 flagged full rank")?;
    ensure(n1.amax() == 0.0, format!("N_1 = {n1}"))?;
    Ok("RankDeficientPrefix(1); N_1 is the zero matrix".into())
}

fn criterion3() -> Outcome {
    let tol = default_rank_tol(4);
    let mut detail = Vec::new();
    for ex in ["jordan_chain", "skew_complex_pair"] {
        let v = fixture_matrix(&format!("{ex}_V.json"));
        let j = fixture_matrix(&format!("{ex}_J.json"));
        let a = fixture_matrix(&format!("{ex}_A.json"));
        let direct = check_admissibility(&v, &j, Some(&a), tol).map_err(|e| e.to_string())?;
        ensure(
            direct.reconstruction_residual == Some(0.0),
            format!("{ex}: V J V⁻¹ does not reproduce A"),
        )?;
        let perms =
            check_admissibility_over_permutations(&v, &j, tol).map_err(|e| e.to_string())?;
        ensure(
            !perms.admissible,
            format!("{ex}: an admissible permutation exists"),
        )?;
        detail.push(format!(
            "{ex}: 0/{} permutations admissible",
            perms.attempts
        ));
    }
    let a3 = fixture_matrix("jordan_chain_A.json");
    match symplectic_schur(&a3, &SearchOptions::default()) {
        Err(Error::DefectiveMatrix { .. }) => detail.push("automatic path: defective".into()),
        other => return Err(format!("jordan chain automatic path gave {other:?}")),
    }
    Ok(detail.join("; "))
}

fn criterion4() -> Outcome {
    let start = Instant::now();
    let a = fixture_matrix("nopa_A.json");
    let g = fixture_system("nopa_sdh.json");
    let search = SearchOptions {
        basis_override: Some(fixture_matrix("nopa_V.json")),
        ..Default::default()
    };
    let schur = symplectic_schur(&a, &search).map_err(|e| e.to_string())?;
    let casc = cascade_realize(
        &g,
        &CascadeOptions {
            search,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;

    let checks = [
        ("S1", max_diff(&schur.s1, &expected_matrix("nopa_S1")), 1e-3),
        ("Y", max_diff(&schur.y, &expected_matrix("nopa_Y")), 1e-3),
        (
            "A1",
            max_diff(
                &(&casc.transformed.a / 1e7),
                &expected_matrix("nopa_A1_over_1e7"),
            ),
            1e-4 * 5.76,
        ),
        (
            "B1",
            max_diff(
                &(&casc.transformed.b / 1e3),
                &expected_matrix("nopa_B1_over_1e3"),
            ),
            1e-4 * 6.0,
        ),
        (
            "C1",
            max_diff(
                &(&casc.transformed.c / 1e3),
                &expected_matrix("nopa_C1_over_1e3"),
            ),
            1e-4 * 6.0,
        ),
        (
            "D1",
            max_diff(&casc.transformed.d, &expected_matrix("nopa_D1")),
            1e-3,
        ),
    ];
    for (name, diff, tol) in checks {
        ensure(
            diff <= tol,
            format!("{name} off by {diff:.2e} (tol {tol:.1e})"),
        )?;
    }
    ensure(casc.subsystems.len() == 2, "expected two subsystems")?;
    let mut coeffs = Vec::new();
    for (k, key) in ["nopa_K1_over_1e3", "nopa_K2_over_1e3"]
        .into_iter()
        .enumerate()
    {
        let sub = &casc.subsystems[k];
        let c = sub.qp_coefficient();
        ensure(
            (c + 5.4e6).abs() <= 1.0,
            format!("G_{} coefficient {c}", k + 1),
        )?;
        let want = expected_complex(key) * Complex64::new(1e3, 0.0);
        let dk = (&sub.coupling - want).camax();
        ensure(
            dk <= 1e-4 * 3e3,
            format!("G_{} coupling off by {dk:.2e}", k + 1),
        )?;
        coeffs.push(c);
    }
    let power: f64 = coeffs.iter().map(|c| (4.0 * c).powi(2)).sum::<f64>() / 4.32e7f64.powi(2);
    ensure(
        (power - 0.5).abs() < 1e-9,
        format!("pump power ratio {power}"),
    )?;

    let alt = SearchOptions {
        basis_override: Some(fixture_matrix("nopa_V_alt.json")),
        ..Default::default()
    };
    match symplectic_schur(&a, &alt) {
        Err(Error::NotAdmissible { .. }) => {}
        other => return Err(format!("alternative basis gave {other:?}")),
    }
    let elapsed = start.elapsed();
    ensure(
        elapsed < Duration::from_millis(100),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "coefficients {:.1} / {:.1}, pump power ratio {power:.3}, alternative basis rejected, {elapsed:?}",
        coeffs[0], coeffs[1]
    ))
}

fn criterion5() -> Outcome {
    let g = fixture_system("nopa_sdh.json");
    let mut detail = Vec::new();
    for (label, search) in [
        (
            "pinned basis",
            SearchOptions {
                basis_override: Some(fixture_matrix("nopa_V.json")),
                ..Default::default()
            },
        ),
        ("automatic", SearchOptions::default()),
    ] {
        let opts = CascadeOptions {
            search,
            ..Default::default()
        };
        let casc = cascade_realize(&g, &opts).map_err(|e| e.to_string())?;
        let grid: Vec<Complex64> = default_frequency_grid(&g.a).into_iter().take(8).collect();
        let report = verify_cascade(&g, &casc, &grid, 1e-6).map_err(|e| e.to_string())?;
        ensure(
            report.checks.len() == 8 && report.max_deviation <= 1e-6,
            format!(
                "{label}: deviation {:.2e} over {} points",
                report.max_deviation,
                report.checks.len()
            ),
        )?;
        detail.push(format!("{label} {:.1e}", report.max_deviation));
    }
    Ok(format!("max relative deviation: {}", detail.join(", ")))
}

const INSTANCES: u64 = 100;

fn criterion6() -> Outcome {
    let mut worst = [0.0f64; 6];
    for seed in 0..INSTANCES {
        let n = 1 + (seed as usize % 4);
        let m = 1 + (seed as usize % 3);
        let tol = default_rank_tol(2 * n);

        // (a) reconstruction and symplecticity.
        let mut r = rng(seed);
        let v = gaussian(&mut r, 2 * n, 2 * n);
        let qr = symplectic_qr(&v, tol).map_err(|e| format!("(a) seed {seed}: {e}"))?;
        let rec = (&v - &qr.s * &qr.y).norm() / v.norm();
        let sym = symplectic_residual(&qr.s).map_err(|e| e.to_string())?;
        ensure(
            rec <= 1e-9 && sym <= 1e-9,
            format!("(a) seed {seed}: {rec:.1e} {sym:.1e}"),
        )?;
        worst[0] = worst[0].max(rec.max(sym));

        // (b) QR succeeds exactly when every prefix flag holds.
        let mut r = rng(10_000 + seed);
        let mut v = gaussian(&mut r, 2 * n, 2 * n);
        if seed % 2 == 1 && n >= 2 {
            let k = r.random_range(1..n);
            break_prefix(&mut v, k, &mut r);
        }
        let flags = prefix_rank_flags(&v, tol).map_err(|e| e.to_string())?;
        let all = flags.iter().all(|&f| f);
        match symplectic_qr(&v, tol) {
            Ok(_) if all => {}
            Err(Error::RankDeficientPrefix(k)) if flags.iter().position(|f| !f) == Some(k - 1) => {}
            other => {
                return Err(format!(
                    "(b) seed {seed}: flags {flags:?} but {:?}",
                    other.err()
                ))
            }
        }

        // (c) realizability under a random symplectic transform.
        let mut r = rng(20_000 + seed);
        let g = sdh_to_quadrature(&random_sdh(&mut r, n, m));
        let t = random_symplectic(&mut r, n, 0.5);
        let gt = transform(&g, &t, 1e-10).map_err(|e| e.to_string())?;
        let rep = check_physical_realizability(&gt, 1e-8);
        ensure(rep.passes(), format!("(c) seed {seed}: {rep}"))?;
        worst[2] = worst[2].max(rep.residuals.iter().cloned().fold(0.0, f64::max));

        // (d) transfer function invariance at 8 frequencies.
        for s in default_frequency_grid(&g.a).into_iter().take(8) {
            if let (Ok(x0), Ok(x1)) = (transfer_function(&g, s), transfer_function(&gt, s)) {
                let dev = relative_deviation(&x1, &x0);
                ensure(dev <= 1e-8, format!("(d) seed {seed}: {dev:.1e}"))?;
                worst[3] = worst[3].max(dev);
            }
        }

        // (e) exact structural zeros in the cascade's A.
        let casc = cascade_realize(&g, &CascadeOptions::default())
            .map_err(|e| format!("(e) seed {seed}: {e}"))?;
        ensure(
            is_lower_block_triangular(&casc.transformed.a)
                && max_above_block_diagonal(&casc.transformed.a) == 0.0,
            format!("(e) seed {seed}: nonzero entry above the block diagonal"),
        )?;

        // (f) associativity of the series product.
        let mut r = rng(30_000 + seed);
        let (g1, g2, g3) = (
            random_sdh(&mut r, n, m),
            random_sdh(&mut r, n, m),
            random_sdh(&mut r, n, m),
        );
        let left = series_product(&series_product(&g3, &g2).unwrap(), &g1).unwrap();
        let right = series_product(&g3, &series_product(&g2, &g1).unwrap()).unwrap();
        let dev = (left.scattering() - right.scattering())
            .camax()
            .max((left.coupling() - right.coupling()).camax() / right.coupling().camax().max(1.0))
            .max(relative_max(left.hamiltonian(), right.hamiltonian()));
        ensure(dev <= 1e-12, format!("(f) seed {seed}: {dev:.1e}"))?;
        worst[5] = worst[5].max(dev);
    }
    Ok(format!(
        "{INSTANCES} instances each; worst (a) {:.1e}, (c) {:.1e}, (d) {:.1e}, (f) {:.1e}",
        worst[0], worst[2], worst[3], worst[5]
    ))
}

fn criterion7() -> Outcome {
    let (out, elapsed) = timed(|| {
        Command::new(env!("CARGO_BIN_EXE_sympcascade"))
            .args([
                "survey", "--n", "3", "--trials", "1000", "--seed", "0", "--format", "json",
            ])
            .output()
    });
    let out = out.map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("exit {:?}", out.status.code()),
    )?;
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let fraction = report["outputs"]["survey"]["success_fraction"]
        .as_f64()
        .ok_or("missing success_fraction")?;
    ensure(fraction >= 0.99, format!("success fraction {fraction}"))?;
    ensure(
        elapsed < Duration::from_secs(60),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "success fraction {fraction:.3}, attempts {}, {:.2} s",
        report["outputs"]["survey"]["attempts_histogram"],
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("integer basis QR regression", criterion1),
        ("skew-orthogonal pair rejection", criterion2),
        ("non-admissible Jordan bases", criterion3),
        ("NOPA cascade end-to-end", criterion4),
        ("transfer equivalence", criterion5),
        ("property suite", criterion6),
        ("genericity survey", criterion7),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail})", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
