use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use cavity_entangle::analysis::{
    emit_table, eta_threshold_with, format_number as num, sweep_with, TableFormat,
};
use cavity_entangle::entanglement::{assemble_rho_atoms, concurrence_closed_form, concurrence_general, concurrence_methods};
use cavity_entangle::kinetics::{build_rate_matrix, evolve as run_evolution};
use cavity_entangle::lindblad::{compare as run_compare, mirror_models, OracleComparison};
use cavity_entangle::solver::steady_state_solvers;
use cavity_entangle::ManifoldPopulations;
use serde_json::json;

use crate::config::RunConfig;

fn table_format(cfg: &RunConfig) -> Result<TableFormat> {
    let name = match (&cfg.output.format, &cfg.output.path) {
        (Some(f), _) => f.clone(),
        (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => "json".into(),
        _ => "csv".into(),
    };
    Ok(name.parse()?)
}

fn write_output(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write output file {}", p.display())),
        None => Ok(out.write_all(bytes)?),
    }
}

pub fn steady(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let params = cfg.system_params()?;
    let solver = steady_state_solvers().get(&cfg.system.solver)?;
    let pops = solver.solve(&params, cfg.system.corrected)?;
    let closed = concurrence_closed_form(&pops).value;
    let general = concurrence_general(&assemble_rho_atoms(&pops)?)?.value;
    let rows = [
        ("P_g", pops.p_g()),
        ("P_s1", pops.p_s1()),
        ("P_s2", pops.p_s2()),
        ("P_o2", pops.p_oprime2()),
        ("C_closed_form", closed),
        ("C_general", general),
    ];
    if cfg.output.json {
        let mut doc = serde_json::Map::new();
        doc.insert("solver".into(), json!(solver.name()));
        doc.insert("corrected".into(), json!(cfg.system.corrected));
        for (k, v) in rows {
            doc.insert(k.into(), json!(v + 0.0));
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "solver = {}", solver.name())?;
        writeln!(out, "corrected = {}", cfg.system.corrected)?;
        for (k, v) in rows {
            writeln!(out, "{k} = {}", num(v))?;
        }
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.sweep_spec()?;
    let format = table_format(cfg)?;
    let solver = steady_state_solvers().get(&cfg.system.solver)?;
    let method = concurrence_methods().get(&cfg.system.method)?;
    let result = sweep_with(&spec, solver.as_ref(), method.as_ref())?;
    let bytes = emit_table(&result, format)?;
    write_output(cfg.output.path.as_deref(), &bytes, out)?;
    let summary = format!(
        "max_value = {}\nargmax_pump = {}\nargmax_k = {}\n",
        num(result.max_value),
        num(result.argmax.0),
        num(result.argmax.1)
    );
    if cfg.output.path.is_some() {
        out.write_all(summary.as_bytes())?;
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

pub fn threshold(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let bounds = cfg.search_bounds()?;
    let solver = steady_state_solvers().get(&cfg.system.solver)?;
    let t = eta_threshold_with(
        cfg.system.gamma,
        &bounds,
        cfg.search.tol,
        &cfg.threshold_options(),
        solver.as_ref(),
    )?;
    writeln!(out, "eta_threshold = {}", num(t.eta))?;
    writeln!(out, "bracket = [{}, {}]", num(t.bracket.0), num(t.bracket.1))?;
    writeln!(out, "pump = {}", num(t.pump))?;
    writeln!(out, "k = {}", num(t.k))?;
    writeln!(out, "concurrence_at_upper = {}", num(t.value_at_upper))?;
    Ok(())
}

fn initial_populations(v: &[f64]) -> Result<ManifoldPopulations> {
    Ok(match *v {
        [g, s1, s2, o2] => ManifoldPopulations::new(g, s1, s2, o2)?,
        [g, s1, s2, o2, d1, d2] => ManifoldPopulations::with_dark(g, s1, s2, o2, d1, d2)?,
        _ => anyhow::bail!("initial populations need 4 or 6 values, got {}", v.len()),
    })
}

pub fn evolve(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let params = cfg.system_params()?;
    let e = &cfg.evolve;
    let initial = initial_populations(&e.initial)?;
    if e.every == 0 {
        anyhow::bail!("--every must be at least 1");
    }
    let m = build_rate_matrix(&params, cfg.system.corrected);
    let traj = run_evolution(&m, &initial, e.t_final, e.dt)?;
    let last = traj.samples.len() - 1;
    let mut text = String::from("t,p_g,p_s1,p_s2,p_o2,p_dark1,p_dark2,total\n");
    for (i, s) in traj.samples.iter().enumerate() {
        if i % e.every != 0 && i != last {
            continue;
        }
        let p = &s.populations;
        let cols = [s.time, p.p_g(), p.p_s1(), p.p_s2(), p.p_oprime2(), p.p_dark1(), p.p_dark2(), p.total()];
        text.push_str(&cols.map(num).join(","));
        text.push('\n');
    }
    write_output(cfg.output.path.as_deref(), text.as_bytes(), out)
}

fn compare_text(r: &OracleComparison) -> String {
    let p = &r.params;
    let s = &p.system;
    let mut t = format!(
        "gamma = {}\npump = {}\nk = {}\neta = {}\ng = {}\nfock_cutoff = {}\n",
        num(s.gamma()),
        num(s.pump()),
        num(s.k1()),
        num(s.eta()),
        num(p.g),
        p.fock_cutoff
    );
    t += &format!(
        "oracle model: independent atomic emission, cavity pumping, `{}` mirror loss (hypothesis)\n",
        r.mirror
    );
    t += &format!("validity_ratio = {}\n", num(r.validity_ratio));
    if let Some(w) = &r.warning {
        t += &format!("warning: {w}\n");
    }
    t += &format!("{:<14}{:>20}{:>20}\n", "quantity", "rate_model", "oracle");
    let labels = ["rho_11", "rho_22", "rho_33", "rho_44"];
    for (i, label) in labels.iter().enumerate() {
        t += &format!("{label:<14}{:>20}{:>20}\n", num(r.rate_diagonal[i]), num(r.oracle_diagonal[i]));
    }
    t += &format!(
        "{:<14}{:>20}{:>20}\n",
        "concurrence",
        num(r.rate_concurrence),
        num(r.oracle_concurrence)
    );
    t += &format!(
        "cutoff_difference(N={} vs N={}) = {}\n",
        p.fock_cutoff,
        p.fock_cutoff + 1,
        num(r.cutoff_difference)
    );
    t
}

pub fn compare(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let params = cfg.oracle_params()?;
    let mirror = mirror_models().get(&cfg.oracle.mirror)?;
    let report = run_compare(&params, mirror.as_ref())?;
    if cfg.output.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        write!(out, "{}", compare_text(&report))?;
    }
    report.ensure_converged(cfg.oracle.convergence_tol)?;
    Ok(())
}
