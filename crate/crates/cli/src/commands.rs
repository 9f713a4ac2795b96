use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use resetdf::decomposition::{reconstruct, PhasePoint};
use resetdf::hosidf::{phase_deg, sweep, validate, ValidateOptions, Validation};
use resetdf::lti::SinusoidInput;
use resetdf::matkit::eigenvalues;
use resetdf::reset::{ConvergenceReport, ElementClass, ResetElement};
use resetdf::sim::{
    recommended_samples_per_period, settle, simulate, steady_state_window, SettleOptions, SimOptions,
};
use resetdf::Error;

use crate::args::{
    Command, DecomposeArgs, GateArgs, HosidfArgs, InfoArgs, SimulateArgs, ValidateArgs,
};
use crate::csv::{fmt_float, Document, Field};
use crate::element::{build_element, frequencies, positive_omega, preset, to_rad};
use crate::exit::{CliError, CliResult};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Info(a) => cmd_info(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Hosidf(a) => cmd_hosidf(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Decompose(a) => cmd_decompose(&a),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("--output {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("stdout: {e}")))
        }
    }
}

fn jobs(requested: Option<usize>) -> CliResult<usize> {
    match requested {
        Some(0) => Err(CliError::Usage("--jobs: must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn max_order(k: usize) -> CliResult<usize> {
    if k == 0 {
        Err(CliError::Usage("--k: must be at least 1".into()))
    } else {
        Ok(k)
    }
}

fn scan(el: &ResetElement, gate: &GateArgs, omega: Option<f64>) -> CliResult<ConvergenceReport> {
    let horizon = match gate.delta_max {
        Some(d) => d,
        None => el.default_scan_horizon(omega)?,
    };
    el.check_convergence(horizon, gate.n_grid)
        .map_err(|e| CliError::from_build("--delta-max/--n-grid", e))
}

/// Runs the convergence scan; failure stops the command unless `--force`.
fn gate(el: &ResetElement, gate: &GateArgs, omega: Option<f64>) -> CliResult<()> {
    let report = scan(el, gate, omega)?;
    if report.pass {
        return Ok(());
    }
    let msg = format!(
        "convergence scan failed: spectral radius {:.6e} at delta = {:.6e} s",
        report.max_radius, report.worst_delta
    );
    if gate.force {
        eprintln!("warning: {msg} (continuing because of --force)");
        Ok(())
    } else {
        Err(CliError::Convergence(format!("{msg}; rerun with --force to override")))
    }
}

fn samples(el: &ResetElement, requested: Option<usize>, omega: f64) -> CliResult<usize> {
    match requested {
        Some(n) if n >= 16 && n.is_multiple_of(8) => Ok(n),
        Some(n) => Err(CliError::Usage(format!(
            "--samples-per-period: must be a multiple of 8 and at least 16, got {n}"
        ))),
        None => Ok(recommended_samples_per_period(el, omega)?),
    }
}

fn input(amplitude: f64, omega: f64) -> CliResult<SinusoidInput> {
    SinusoidInput::new(amplitude, omega).map_err(|e| CliError::from_build("--amplitude", e))
}

/// Ordered parallel map over at most `jobs` threads.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(Option::unwrap).collect()
}

fn indexed(prefix: &str, m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("{prefix}_{i}")).collect()
}

fn cmd_info(args: &InfoArgs) -> CliResult<()> {
    let el = build_element(&args.element)?;
    let omega = args
        .omega
        .map(|w| positive_omega("--omega", to_rad(w, args.hz)))
        .transpose()?;
    let base = el.base();
    let mut out = String::new();
    let class = match el.classify() {
        Ok(ElementClass::Integrator) => "reset integrator".to_string(),
        Ok(ElementClass::Hurwitz) => "Hurwitz base system".to_string(),
        Err(e) => format!("unsupported by the closed form ({e})"),
    };
    let name = format!("{:?}", preset(&args.element)?).to_lowercase();
    out += &format!("element: {name}, order {}, {class}\n", el.order());
    out += &format!("A_r = {}\n", base.a());
    out += &format!("B_r = {}\n", base.b());
    out += &format!("C_r = {}\n", base.c());
    out += &format!("D_r = {}\n", base.d());
    out += &format!("A_rho = {}\n", el.reset_matrix());
    out += &format!("min reset interval = {} s\n", el.min_reset_interval());
    let eig: Vec<String> = eigenvalues(base.a())?
        .iter()
        .map(|l| format!("{}{:+}j", l.re, l.im))
        .collect();
    out += &format!("eigenvalues of A_r: {}\n", eig.join(", "));
    let report = scan(&el, &args.gate, omega)?;
    let horizon = report.grid.last().copied().unwrap_or(f64::NAN);
    out += &format!(
        "convergence: {} (max spectral radius of A_rho e^(A_r delta) = {:.6e} at delta = {:.6e} s; \
         {} log-spaced delta up to {:.6e} s)\n",
        if report.pass { "PASS" } else { "FAIL" },
        report.max_radius,
        report.worst_delta,
        report.grid.len(),
        horizon
    );
    write_output(None, &out)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let el = build_element(&args.element)?;
    let omega = positive_omega("--omega", to_rad(args.freq.omega, args.freq.hz))?;
    let input = input(args.amplitude, omega)?;
    if args.periods < 2 {
        return Err(CliError::Usage("--periods: must be at least 2".into()));
    }
    let opts = SimOptions {
        n_periods: args.periods,
        samples_per_period: samples(&el, args.samples_per_period, omega)?,
        x0: None,
        reset_enabled: !args.no_reset,
        start_period: 0,
    };
    let trace = simulate(&el, &input, &opts)?;
    let m = trace.order();
    let mut header = vec!["t".to_string(), "u".into(), "y".into()];
    header.extend(indexed("x", m));
    header.push("is_post_reset".into());
    let mut doc = Document::new(&header);
    let push_trace = |doc: &mut Document, tr: &resetdf::sim::SimTrace| {
        for i in 0..tr.len() {
            let mut row: Vec<Field> = vec![tr.t[i].into(), tr.u[i].into(), tr.y[i].into()];
            row.extend(tr.x[i].col(0).into_iter().map(Field::from));
            row.push(tr.post_reset[i].into());
            doc.push(row);
        }
    };
    push_trace(&mut doc, &trace);
    let window = steady_state_window(&trace, args.steady_tol);
    if let Ok(w) = &window {
        doc.marker(&format!(
            "steady_state_window periods_to_converge={} change={}",
            w.periods_to_converge,
            fmt_float(w.change)
        ));
        push_trace(&mut doc, &w.trace);
    }
    write_output(args.output.as_deref(), &doc.emit())?;
    match window {
        Ok(w) => {
            eprintln!(
                "steady state after {} periods; {} resets in the window",
                w.periods_to_converge,
                w.trace.resets.len()
            );
            Ok(())
        }
        Err(e @ Error::NotConverged { .. }) => Err(CliError::Convergence(format!(
            "{e}; trace written without a steady-state section, try more --periods"
        ))),
        Err(e) => Err(e.into()),
    }
}

fn complex_fields(z: Complex64) -> [Field; 5] {
    let mag = z.norm();
    [
        z.re.into(),
        z.im.into(),
        mag.into(),
        (20.0 * mag.log10()).into(),
        phase_deg(z).into(),
    ]
}

fn cmd_hosidf(args: &HosidfArgs) -> CliResult<()> {
    let el = build_element(&args.element)?;
    let omegas = frequencies(&args.freq)?;
    let k_max = max_order(args.k)?;
    gate(&el, &args.gate, omegas.first().copied())?;
    let table = sweep(&el, &omegas, k_max, jobs(args.jobs)?)?;
    let mut doc = Document::new(&[
        "omega_rad_s", "k", "re", "im", "mag", "mag_db", "phase_deg", "source",
    ]);
    for (w, point) in table.omegas.iter().zip(&table.points) {
        let point = point.as_ref().map_err(|e| match e {
            Error::NotConverged { .. } => CliError::from(e.clone()),
            e => CliError::Numerical(Error::Unsupported(format!("omega = {w}: {e}"))),
        })?;
        for k in 1..=k_max {
            let mut row = vec![Field::from(*w), k.into()];
            row.extend(complex_fields(point.get(k)));
            row.push("closed_form".into());
            doc.push(row);
        }
        let mut row = vec![Field::from(*w), 1usize.into()];
        row.extend(complex_fields(point.bls));
        row.push("bls".into());
        doc.push(row);
    }
    write_output(args.output.as_deref(), &doc.emit())
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let el = build_element(&args.element)?;
    let omegas = frequencies(&args.freq)?;
    let k_max = max_order(args.k)?;
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol: must be positive, got {}", args.tol)));
    }
    input(args.steady.amplitude, omegas[0])?;
    if let Some(n) = args.steady.samples_per_period {
        samples(&el, Some(n), omegas[0])?;
    }
    gate(&el, &args.gate, omegas.first().copied())?;
    let opts = ValidateOptions {
        amplitude: args.steady.amplitude,
        samples_per_period: args.steady.samples_per_period,
        steady_tol: args.steady.steady_tol,
        max_periods: args.steady.max_periods,
        q_scale: args.q_scale,
    };
    let results: Vec<resetdf::Result<Validation>> =
        par_map(&omegas, jobs(args.jobs)?, |&w| validate(&el, w, k_max, &opts));
    let mut doc = Document::new(&[
        "omega_rad_s", "k", "closed_re", "closed_im", "sim_re", "sim_im", "error", "error_kind",
    ]);
    let mut worst = (0.0f64, 0.0f64, 0usize);
    for r in results {
        let v = r?;
        for row in &v.rows {
            let kind = if row.k % 2 == 1 { "relative" } else { "even_ratio" };
            if row.rel_error.is_nan() || row.rel_error >= worst.0 {
                worst = (row.rel_error, v.omega, row.k);
            }
            doc.push(vec![
                v.omega.into(),
                row.k.into(),
                row.closed_form.re.into(),
                row.closed_form.im.into(),
                row.simulated.re.into(),
                row.simulated.im.into(),
                row.rel_error.into(),
                kind.into(),
            ]);
        }
    }
    write_output(args.output.as_deref(), &doc.emit())?;
    let (err, w, k) = worst;
    let summary = format!(
        "largest error {err:.3e} (omega = {w} rad/s, k = {k}) against --tol {:.3e}",
        args.tol
    );
    if err < args.tol {
        eprintln!("PASS: {summary}");
        Ok(())
    } else {
        Err(CliError::Validation(summary))
    }
}

fn cmd_decompose(args: &DecomposeArgs) -> CliResult<()> {
    let el = build_element(&args.element)?;
    let omega = positive_omega("--omega", to_rad(args.freq.omega, args.freq.hz))?;
    let input = input(args.steady.amplitude, omega)?;
    gate(&el, &args.gate, Some(omega))?;
    let opts = SettleOptions {
        samples_per_period: samples(&el, args.steady.samples_per_period, omega)?,
        tol: args.steady.steady_tol,
        max_periods: args.steady.max_periods,
        reset_enabled: true,
    };
    let win = settle(&el, &input, &opts)?.trace;
    let points = PhasePoint::for_samples(&win.t, omega);
    let dec = reconstruct(&el, &input, &points)?;
    let m = el.order();
    let mut header = vec!["t".to_string()];
    for prefix in ["x_bls", "q", "x_recon", "x_sim"] {
        header.extend(indexed(prefix, m));
    }
    header.push("err".into());
    let mut doc = Document::new(&header);
    let mut max_err = 0.0f64;
    for i in 0..win.len() {
        let err = (&dec.x[i] - &win.x[i]).max_abs();
        max_err = max_err.max(err);
        let mut row = vec![Field::from(win.t[i])];
        for v in [&dec.x_bls[i], &dec.q[i], &dec.x[i], &win.x[i]] {
            row.extend(v.col(0).into_iter().map(Field::from));
        }
        row.push(err.into());
        doc.push(row);
    }
    write_output(args.output.as_deref(), &doc.emit())?;
    eprintln!("Q = {}", dec.scaling.q);
    eprintln!("q_bar = {}", dec.square_wave.mean);
    eprintln!("q_hat = {}", dec.square_wave.peak);
    eprintln!(
        "scaling residual = {:.3e} (rank {}{}), reset-jump residual = {:.3e}",
        dec.scaling.residual,
        dec.scaling.rank,
        if dec.scaling.rank_deficient { ", deficient" } else { "" },
        dec.jump_residual
    );
    eprintln!("max |x_recon - x_sim| = {max_err:.3e}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        for jobs in [1, 3, 64] {
            assert_eq!(par_map(&items, jobs, |&i| i * i), items.iter().map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(par_map(&[] as &[usize], 4, |&i| i).is_empty());
    }

    #[test]
    fn zero_magnitude_row() {
        let f = complex_fields(Complex64::new(0.0, 0.0));
        assert_eq!(f[3], Field::Float(f64::NEG_INFINITY));
        assert_eq!(f[4], Field::Float(0.0));
    }
}
