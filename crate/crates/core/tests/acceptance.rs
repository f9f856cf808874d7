//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::Instant;

use cavity_entangle::analysis::{
    emit_table, eta_threshold, max_concurrence, sweep, SearchBounds, SweepSpec, TableFormat,
};
use cavity_entangle::entanglement::{
    assemble_rho_atoms, concurrence_closed_form, concurrence_general, manifold_densities,
};
use cavity_entangle::kinetics::{build_rate_matrix, evolve, steady_state_closed_form, steady_state_numeric};
use cavity_entangle::lindblad::{cutoff_difference, oracle_reduced_state, OracleParams, PerStateLoss};
use cavity_entangle::{ManifoldPopulations, SystemParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn threshold_reproduction() -> Outcome {
    let t = eta_threshold(1.0, &SearchBounds::default(), 1e-3).map_err(|e| e.to_string())?;
    let detail = format!("eta* = {:.4} (positivity first at pump={:.4}, k={:.4})", t.eta, t.pump, t.k);
    if (t.eta - 7.746).abs() <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn linear_mirror_null() -> Outcome {
    let spec = SweepSpec {
        eta: 1.0,
        ..SweepSpec::default()
    };
    let r = sweep(&spec).map_err(|e| e.to_string())?;
    let nonzero = r.grid.iter().flatten().filter(|&&c| c != 0.0).count();
    let detail = format!("{} points, {} nonzero, max {:e}", r.grid.len() * r.k_values.len(), nonzero, r.max_value);
    if nonzero == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn manifold_values() -> Outcome {
    let d = manifold_densities();
    let values = [
        ("s1", &d.s1, 0.5),
        ("g", &d.ground, 0.0),
        ("s2", &d.s2, 0.0),
        ("o'2", &d.oprime2, 0.0),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, rho, expected) in values {
        let c = concurrence_general(rho).map_err(|e| e.to_string())?.value;
        worst = worst.max((c - expected).abs());
        parts.push(format!("C({name})={c}"));
    }
    let detail = format!("{} (max error {worst:e})", parts.join(", "));
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_equivalence() -> Outcome {
    let mut rng = common::rng(2024);
    let mut worst: f64 = 0.0;
    let draws = 2000;
    for _ in 0..draws {
        let pops = common::random_populations(&mut rng);
        let general = assemble_rho_atoms(&pops)
            .and_then(|rho| concurrence_general(&rho))
            .map_err(|e| e.to_string())?;
        worst = worst.max((general.value - concurrence_closed_form(&pops).value).abs());
    }
    let detail = format!("{draws} draws, max |difference| {worst:e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn steady_state_consistency() -> Outcome {
    let mut rng = common::rng(17);
    let mut worst: f64 = 0.0;
    let draws = 2000;
    for _ in 0..draws {
        let params = common::random_params(&mut rng);
        let closed = steady_state_closed_form(&params).map_err(|e| e.to_string())?;
        let numeric = steady_state_numeric(&build_rate_matrix(&params, true)).map_err(|e| e.to_string())?;
        worst = worst.max(closed.max_abs_diff(&numeric));
    }
    let detail = format!("{draws} draws, max component difference {worst:e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rising_maximum() -> Outcome {
    let bounds = SearchBounds::default();
    let maxima = (1..=20)
        .map(|eta| max_concurrence(eta as f64, 1.0, &bounds).map(|m| m.value))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let drops: Vec<usize> = (1..maxima.len()).filter(|&i| maxima[i] < maxima[i - 1]).collect();
    let detail = format!(
        "C_max(eta=1..20): {}",
        maxima.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(" ")
    );
    if drops.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; decreases after eta = {drops:?}"))
    }
}

fn kinetic_conservation() -> Outcome {
    let mut rng = common::rng(99);
    let mut cases = vec![
        SystemParams::in_gamma_units(1.0, 1.0, 1.0).unwrap(),
        SystemParams::in_gamma_units(2.0, 0.5, 10.0).unwrap(),
        SystemParams::in_gamma_units(7.4, 20.0, 12.0).unwrap(),
    ];
    for _ in 0..12 {
        let pump = common::log_uniform(&mut rng, 1e-2, 1e1);
        let k = common::log_uniform(&mut rng, 1e-2, 1e1);
        cases.push(SystemParams::in_gamma_units(pump, k, 1.0 + 19.0 * common::log_uniform(&mut rng, 1e-2, 1.0)).unwrap());
    }
    let starts = [
        ManifoldPopulations::ground(),
        ManifoldPopulations::with_dark(0.4, 0.1, 0.1, 0.1, 0.2, 0.1).unwrap(),
    ];
    let mut worst_total: f64 = 0.0;
    for params in &cases {
        let m = build_rate_matrix(params, true);
        let dt = (0.5 / (params.max_rate() + 2.0 * params.pump())).min(0.01);
        for start in &starts {
            let traj = evolve(&m, start, 200.0, dt).map_err(|e| e.to_string())?;
            for s in &traj.samples {
                worst_total = worst_total.max((s.populations.total() - 1.0).abs());
                if s.populations.dark() != start.dark() {
                    return Err(format!("dark populations changed at t={} for {params:?}", s.time));
                }
            }
        }
    }
    let detail = format!("{} parameter sets, t in [0, 200], max |total - 1| {worst_total:e}, dark constant", cases.len());
    if worst_total <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn figure_surfaces() -> Outcome {
    let mut maxima = Vec::new();
    for eta in [10.0, 12.0] {
        let spec = SweepSpec {
            eta,
            ..SweepSpec::default()
        };
        let r = sweep(&spec).map_err(|e| e.to_string())?;
        let bytes = emit_table(&r, TableFormat::Csv).map_err(|e| e.to_string())?;
        let mut reader = csv::Reader::from_reader(bytes.as_slice());
        let mut max: f64 = 0.0;
        let mut rows = 0;
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            let c: f64 = record[2].parse().map_err(|e| format!("{e}"))?;
            max = max.max(c);
            rows += 1;
        }
        if rows != 200 * 200 {
            return Err(format!("eta={eta}: {rows} data rows"));
        }
        maxima.push(max);
    }
    let detail = format!("CSV maxima: eta=10 -> {:.6}, eta=12 -> {:.6}", maxima[0], maxima[1]);
    if maxima[0] > 0.0 && maxima[1] > maxima[0] {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_sign_agreement() -> Outcome {
    let err = |e: cavity_entangle::Error| e.to_string();
    let at = max_concurrence(12.0, 1.0, &SearchBounds::default()).map_err(err)?;
    let oracle_c = |eta: f64, cutoff: usize| -> Result<f64, String> {
        let system = SystemParams::in_gamma_units(at.pump, at.k, eta).map_err(err)?;
        let p = OracleParams::new(100.0, cutoff, system).map_err(err)?;
        let rho = oracle_reduced_state(&p, &PerStateLoss).map_err(err)?;
        Ok(concurrence_general(&rho).map_err(err)?.value)
    };
    let c12 = oracle_c(12.0, 6)?;
    let c1: Vec<f64> = [5, 6, 7].into_iter().map(|n| oracle_c(1.0, n)).collect::<Result<_, _>>()?;
    let system = SystemParams::in_gamma_units(at.pump, at.k, 12.0).map_err(err)?;
    let conv = cutoff_difference(&OracleParams::new(100.0, 6, system).map_err(err)?, &PerStateLoss, 5, 7).map_err(err)?;
    let detail = format!(
        "argmax pump={:.4} k={:.4}: oracle C(eta=12)={c12:.6} (rate model {:.6}), C(eta=1) at N=5,6,7 = {:?}, N 5->7 change {conv:e}",
        at.pump, at.k, at.value, c1
    );
    if c12 > 0.0 && c1.iter().all(|&c| c < 1e-6) && conv < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("threshold reproduction", threshold_reproduction),
        ("linear-mirror null result", linear_mirror_null),
        ("manifold entanglement values", manifold_values),
        ("closed-form / eigenvalue equivalence", closed_form_equivalence),
        ("steady-state consistency", steady_state_consistency),
        ("rising maximum", rising_maximum),
        ("kinetic conservation", kinetic_conservation),
        ("figure-surface reproduction", figure_surfaces),
        ("oracle sign agreement", oracle_sign_agreement),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} [{secs:.2}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} [{secs:.2}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
