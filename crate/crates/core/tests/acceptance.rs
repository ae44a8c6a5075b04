//! One PASS/FAIL line per acceptance criterion.

use std::time::Instant;

use foamswell::config::SimConfig;
use foamswell::coupled::{run_simulation, CoupledState, RunReport};
use foamswell::diagnostics::{
    check_energy_monotone, check_energy_series, check_mass_order, fuzz_gn, fuzz_strain_bound, MASS_RATIO_BAND,
};
use foamswell::scenarios;
use foamswell::verify::{galerkin_cross, mms_beam, mms_pore, GALERKIN_TOL};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn run(cfg: &SimConfig, observer: &mut dyn FnMut(usize, &CoupledState)) -> Result<RunReport, String> {
    let setup = cfg.build().map_err(|e| e.to_string())?;
    run_simulation(setup.state, setup.t_final, &setup.beam, &setup.pore, &setup.coupling, observer)
        .map_err(|f| f.to_string())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn equilibrium() -> Verdict {
    let cfg = scenarios::EQUILIBRIUM.config();
    let setup = cfg.build().map_err(|e| e.to_string())?;
    let u0 = setup.state.beam.u().values().to_vec();
    let p0 = setup.state.p_bar.values().to_vec();
    let mut drift = 0.0f64;
    let started = Instant::now();
    let report = run(&cfg, &mut |_, st| {
        drift = drift
            .max(max_diff(st.beam.u().values(), &u0))
            .max(st.beam.v().max_abs())
            .max(max_diff(st.p_bar.values(), &p0));
    })?;
    let secs = started.elapsed().as_secs_f64();
    let steps = report.rows.len() - 1;
    let detail = format!("N=128 steps={steps} drift={drift:.2e} runtime={secs:.2}s");
    if steps >= 1000 && drift < 1e-9 && secs < 5.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mass_error(r: &RunReport) -> f64 {
    r.mass_drift()
}

fn mass_conservation() -> Verdict {
    let started = Instant::now();
    let base = scenarios::REFERENCE.config();
    let at = |n: usize, dt: f64| -> Result<RunReport, String> {
        let mut cfg = base.clone();
        cfg.discretization.n_beam = n;
        cfg.discretization.n_pore = n;
        cfg.discretization.dt = dt;
        run(&cfg, &mut |_, _| {})
    };
    let reference = at(128, 1e-3)?;
    let halved = at(128, 5e-4)?;
    let order = check_mass_order(&halved, &reference);
    let m0 = reference.rows[0].mass;
    let rel = mass_error(&reference) / m0.abs();
    let joint: Vec<f64> = [(64, 2e-3), (256, 5e-4)]
        .into_iter()
        .map(|(n, dt)| at(n, dt).map(|r| mass_error(&r)))
        .collect::<Result<_, _>>()?;
    let joint_ok = joint[0] > mass_error(&reference) && mass_error(&reference) > joint[1];
    let secs = started.elapsed().as_secs_f64();
    let detail = format!(
        "ratio={:.3} band=[{}, {}] rel_drift={rel:.2e} joint_drifts=[{:.2e}, {:.2e}, {:.2e}] runtime={secs:.1}s",
        order.measured,
        MASS_RATIO_BAND.0,
        MASS_RATIO_BAND.1,
        joint[0],
        mass_error(&reference),
        joint[1]
    );
    if order.passed && rel < 1e-3 && joint_ok && secs < 60.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn strain_positivity() -> Verdict {
    let mut states = 0;
    let mut worst = f64::INFINITY;
    let mut min_strain = f64::INFINITY;
    for s in scenarios::ALL {
        let report = run(&s.config(), &mut |_, _| {})?;
        for b in &report.strain {
            states += 1;
            worst = worst.min(b.margin());
            min_strain = min_strain.min(b.measured);
        }
    }
    let fuzz = fuzz_strain_bound(100, 1);
    let detail = format!(
        "states={states} min_strain={min_strain:.3} worst_margin={worst:.3e} fuzz_violations={}/{}",
        fuzz.failures, fuzz.samples
    );
    if min_strain > 0.0 && worst >= 0.0 && fuzz.failures == 0 && fuzz.samples == 100 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn interpolation_inequality() -> Verdict {
    let a = fuzz_gn(100, 2, true);
    let b = fuzz_gn(100, 3, false);
    let detail = format!(
        "vanishing {}/{} general {}/{} violations",
        a.failures, a.samples, b.failures, b.samples
    );
    if a.failures == 0 && b.failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn convergence() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    type Ladder = fn() -> foamswell::Result<Vec<foamswell::output::OrderRow>>;
    for (name, ladder) in [("beam", mms_beam as Ladder), ("pore", mms_pore as Ladder)] {
        let started = Instant::now();
        let rows = ladder().map_err(|e| e.to_string())?;
        let secs = started.elapsed().as_secs_f64();
        ok &= secs < 120.0 && rows.iter().all(|r| r.passed);
        for study in ["spatial", "temporal"] {
            let orders: Vec<String> = rows
                .iter()
                .filter(|r| r.study == study)
                .filter_map(|r| r.observed.map(|o| format!("{o:.2}")))
                .collect();
            parts.push(format!("{name}-{study}=[{}]", orders.join(",")));
        }
        parts.push(format!("{name}-runtime={secs:.1}s"));
    }
    let detail = parts.join(" ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn galerkin() -> Verdict {
    let c = galerkin_cross().map_err(|e| e.to_string())?;
    let detail = format!(
        "n={} N={} final_rel_l2={:.2e} trajectory_rel_l2={:.2e} tol={GALERKIN_TOL:e}",
        c.modes, c.cells, c.final_rel_l2, c.trajectory_rel_l2
    );
    if c.passed() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn energy() -> Verdict {
    let mut worst = f64::INFINITY;
    for s in scenarios::ALL {
        let report = run(&s.config(), &mut |_, _| {})?;
        let check = check_energy_series(&report);
        worst = worst.min(check.margin);
    }
    let decay = run(&scenarios::FREE_DECAY.config(), &mut |_, _| {})?;
    let mono = check_energy_monotone(&decay);
    let detail = format!("worst_margin={worst:.3e} free_decay_max_rise={:.2e}", mono.measured);
    if worst >= 0.0 && mono.passed {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn compatibility() -> Verdict {
    let base = scenarios::REFERENCE.config();
    let mut touching = base.clone();
    touching.initial.alpha = touching.initial.stretch / std::f64::consts::PI;
    let mut broken = base.clone();
    broken.initial.auto_compatibility = false;
    broken.initial.v0_slope = 0.0;
    let mut compatible = base;
    compatible.initial.auto_compatibility = true;
    let field = |cfg: &SimConfig| match cfg.build() {
        Ok(_) => "accepted".to_string(),
        Err(foamswell::config::ConfigError::Semantic { field, .. }) => field,
        Err(e) => e.to_string(),
    };
    let (a, b, c) = (field(&touching), field(&broken), field(&compatible));
    let detail = format!("touching->{a} broken->{b} compatible->{c}");
    if a == "initial.alpha" && b == "initial.v0_slope" && c == "accepted" {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("equilibrium fixed point", equilibrium),
        ("mass conservation order", mass_conservation),
        ("strain positivity and lower bound", strain_positivity),
        ("interpolation inequality fuzz", interpolation_inequality),
        ("manufactured-solution convergence", convergence),
        ("Galerkin cross-check", galerkin),
        ("energy inequality", energy),
        ("compatibility validator", compatibility),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let verdict = check();
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.2}s)", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail} ({secs:.2}s)", k + 1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
