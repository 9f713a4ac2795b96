use std::f64::consts::PI;

use resetdf::hosidf::log_grid;
use resetdf::lti::StateSpace;
use resetdf::reset::{make_fore, make_integrator, make_sore, ResetElement};
use resetdf::Mat;

use crate::args::{ElementArgs, FreqArgs, Preset};
use crate::exit::{CliError, CliResult};

/// Parses `"a,b;c,d"`: rows split by `;`, entries by `,`.
pub fn parse_matrix(flag: &str, text: &str) -> CliResult<Mat> {
    let bad = |msg: String| CliError::Usage(format!("{flag}: {msg}"));
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .enumerate()
        .map(|(i, row)| {
            row.split(',')
                .map(|e| {
                    e.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("row {}: cannot parse '{e}' as a number", i + 1)))
                })
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<_>>()?;
    let cols = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(bad(format!(
            "row {} has {} entries, row 1 has {cols}",
            i + 1,
            r.len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(bad("entries must be finite".into()));
    }
    Mat::from_rows(&rows).map_err(|e| bad(e.to_string()))
}

/// `--rho`: a scalar `g` means `g I_m`, otherwise an `m x m` matrix.
pub fn parse_reset_matrix(text: &str, m: usize) -> CliResult<Mat> {
    if let Ok(g) = text.trim().parse::<f64>() {
        if !g.is_finite() {
            return Err(CliError::Usage("--rho: must be finite".into()));
        }
        return Ok(Mat::identity(m).scale(g));
    }
    let rho = parse_matrix("--rho", text)?;
    if rho.shape() != (m, m) {
        let (r, c) = rho.shape();
        return Err(CliError::Usage(format!(
            "--rho: expected {m}x{m} for an order-{m} element, got {r}x{c}"
        )));
    }
    Ok(rho)
}

pub fn preset(args: &ElementArgs) -> CliResult<Preset> {
    match (args.preset, &args.a) {
        (Some(p), _) => Ok(p),
        (None, Some(_)) => Ok(Preset::Custom),
        (None, None) => Err(CliError::Usage(
            "--preset: required (integrator, fore, sore or custom)".into(),
        )),
    }
}

pub fn build_element(args: &ElementArgs) -> CliResult<ResetElement> {
    let preset = preset(args)?;
    if preset != Preset::Custom {
        for (flag, v) in [("--A", &args.a), ("--B", &args.b), ("--C", &args.c), ("--D", &args.d)] {
            if v.is_some() {
                return Err(CliError::Usage(format!("{flag}: only valid with --preset custom")));
            }
        }
    }
    if preset != Preset::Integrator && args.m.is_some() {
        return Err(CliError::Usage("--m: only valid with --preset integrator".into()));
    }
    let el = match preset {
        Preset::Integrator => {
            let m = args.m.unwrap_or(1);
            if m == 0 {
                return Err(CliError::Usage("--m: must be at least 1".into()));
            }
            make_integrator(m, parse_reset_matrix(&args.rho, m)?)
                .map_err(|e| CliError::from_build("--rho", e))?
        }
        Preset::Fore => make_fore(args.omega_r, parse_reset_matrix(&args.rho, 1)?)
            .map_err(|e| CliError::from_build("--omega-r", e))?,
        Preset::Sore => make_sore(args.omega_r, args.beta_r, parse_reset_matrix(&args.rho, 2)?)
            .map_err(|e| CliError::from_build("--omega-r/--beta-r", e))?,
        Preset::Custom => {
            let need = |flag: &str, v: &Option<String>| {
                v.as_deref()
                    .ok_or_else(|| CliError::Usage(format!("{flag}: required with --preset custom")))
                    .and_then(|t| parse_matrix(flag, t))
            };
            let a = need("--A", &args.a)?;
            let b = need("--B", &args.b)?;
            let c = need("--C", &args.c)?;
            let d = match &args.d {
                Some(t) => parse_matrix("--D", t)?,
                None => Mat::scalar(0.0),
            };
            let m = a.rows();
            let base = StateSpace::new(a, b, c, d).map_err(|e| CliError::from_build("--A/--B/--C/--D", e))?;
            ResetElement::new(base, parse_reset_matrix(&args.rho, m)?, args.delta_m)
                .map_err(|e| CliError::from_build("--rho", e))?
        }
    };
    el.with_min_reset_interval(args.delta_m)
        .map_err(|e| CliError::from_build("--delta-m", e))
}

pub fn to_rad(omega: f64, hz: bool) -> f64 {
    if hz {
        2.0 * PI * omega
    } else {
        omega
    }
}

pub fn positive_omega(flag: &str, omega: f64) -> CliResult<f64> {
    if omega > 0.0 && omega.is_finite() {
        Ok(omega)
    } else {
        Err(CliError::Usage(format!("{flag}: must be positive, got {omega}")))
    }
}

/// Frequencies in rad/s, ascending for grids.
pub fn frequencies(args: &FreqArgs) -> CliResult<Vec<f64>> {
    if let Some(w) = args.omega {
        return Ok(vec![positive_omega("--omega", to_rad(w, args.hz))?]);
    }
    let (Some(start), Some(stop)) = (args.omega_start, args.omega_stop) else {
        return Err(CliError::Usage(
            "--omega: required, or --omega-start with --omega-stop".into(),
        ));
    };
    let start = positive_omega("--omega-start", to_rad(start, args.hz))?;
    let stop = positive_omega("--omega-stop", to_rad(stop, args.hz))?;
    if args.omega_count == 0 {
        return Err(CliError::Usage("--omega-count: must be at least 1".into()));
    }
    log_grid(start, stop, args.omega_count).map_err(|e| CliError::from_build("--omega-start/--omega-stop", e))
}
