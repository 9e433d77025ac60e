//! The `bounds` subcommand: tabulates any closed-form bound over a
//! parameter grid as CSV rows of parameters, value and vacuity flag.

use crate::fmt::fmt_real;
use crate::outputs::write_text;
use crate::CliError;
use popsize::bounds;
use std::path::PathBuf;

struct Formula {
    name: &'static str,
    params: &'static [&'static str],
    eval: fn(&[f64]) -> Result<f64, String>,
}

fn err_str<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const FORMULAS: &[Formula] = &[
    Formula {
        name: "harmonic",
        params: &["n"],
        eval: |v| bounds::harmonic(v[0] as u64).map_err(err_str),
    },
    Formula {
        name: "subexp_mgf_bound",
        params: &["alpha", "beta", "s"],
        eval: |v| {
            bounds::subexp_mgf_bound(bounds::SubExpParams { alpha: v[0], beta: v[1] }, v[2])
                .map_err(err_str)
        },
    },
    Formula {
        name: "chernoff_sum_bound",
        params: &["alpha", "beta", "k", "t"],
        eval: |v| {
            Ok(bounds::chernoff_sum_bound(
                bounds::SubExpParams { alpha: v[0], beta: v[1] },
                v[2] as u32,
                v[3],
            ))
        },
    },
    Formula {
        name: "expected_max_low",
        params: &["n", "q"],
        eval: |v| bounds::expected_max_interval(v[0] as u64, v[1]).map(|i| i.0).map_err(err_str),
    },
    Formula {
        name: "expected_max_high",
        params: &["n", "q"],
        eval: |v| bounds::expected_max_interval(v[0] as u64, v[1]).map(|i| i.1).map_err(err_str),
    },
    Formula {
        name: "max_geom_lower_tail",
        params: &["q", "lambda"],
        eval: |v| bounds::max_geom_lower_tail(v[0], v[1]).map_err(err_str),
    },
    Formula {
        name: "max_geom_upper_tail",
        params: &["q", "lambda"],
        eval: |v| bounds::max_geom_upper_tail(v[0], v[1]).map_err(err_str),
    },
    Formula {
        name: "half_geom_subexp_tail",
        params: &["lambda"],
        eval: |v| Ok(bounds::half_geom_subexp_tail(v[0])),
    },
    Formula {
        name: "max_geom_range_tail",
        params: &["n"],
        eval: |v| bounds::max_geom_range_tails(v[0] as u64).map(|t| t.0).map_err(err_str),
    },
    Formula {
        name: "sum_maxima_tail",
        params: &["k", "t"],
        eval: |v| Ok(bounds::sum_maxima_tail(v[0] as u32, v[1])),
    },
    Formula {
        name: "average_estimate_tail",
        params: &["n", "k"],
        eval: |v| bounds::average_estimate_tail(v[0] as u64, v[1] as u32).map_err(err_str),
    },
    Formula {
        name: "epidemic_tail",
        params: &["n", "alpha_u"],
        eval: |v| Ok(bounds::epidemic_tail(v[0] as u64, v[1])),
    },
    Formula {
        name: "epidemic_expected_time",
        params: &["n"],
        eval: |v| bounds::epidemic_expected_time(v[0] as u64).map_err(err_str),
    },
    Formula {
        name: "partial_epidemic_tail",
        params: &["a", "c", "alpha_u"],
        eval: |v| bounds::partial_epidemic_tail(v[0] as u64, v[1], v[2]).map_err(err_str),
    },
    Formula {
        name: "interaction_count_coefficient",
        params: &["c"],
        eval: |v| bounds::interaction_count_bound(v[0], 2).map(|b| b.0).map_err(err_str),
    },
    Formula {
        name: "partition_tail",
        params: &["n", "a"],
        eval: |v| Ok(bounds::partition_tail(v[0] as u64, v[1])),
    },
    Formula {
        name: "balls_bins_decay_bound",
        params: &["k", "delta", "m", "n"],
        eval: |v| {
            bounds::balls_bins_decay_bound(v[0] as u64, v[1], v[2] as u64, v[3] as u64)
                .map_err(err_str)
        },
    },
    Formula {
        name: "count_decay_bound",
        params: &["k", "delta", "t"],
        eval: |v| bounds::count_decay_bound(v[0] as u64, v[1], v[2]).map_err(err_str),
    },
];

/// Parses one `--param key=spec` where spec is a comma list (`6,8,12`), a
/// range `start:stop[:step]` (inclusive), or a single value.
fn parse_param(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let (key, rhs) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--param expects key=values, got {spec:?}")))?;
    let parse_num = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad number {s:?} in --param {key}")))
    };
    let values = if rhs.is_empty() {
        Vec::new()
    } else if rhs.contains(':') {
        let parts: Vec<&str> = rhs.split(':').collect();
        if parts.len() > 3 {
            return Err(CliError::Usage(format!("bad range {rhs:?} (start:stop[:step])")));
        }
        let start = parse_num(parts[0])?;
        let stop = parse_num(parts[1])?;
        let step = if parts.len() == 3 { parse_num(parts[2])? } else { 1.0 };
        if step <= 0.0 {
            return Err(CliError::Usage("range step must be positive".into()));
        }
        let mut values = Vec::new();
        let mut x = start;
        while x <= stop + 1e-12 {
            values.push(x);
            x += step;
        }
        values
    } else {
        rhs.split(',').map(parse_num).collect::<Result<Vec<_>, _>>()?
    };
    Ok((key.to_string(), values))
}

pub fn bounds_table(
    formula_name: &str,
    param_specs: &[String],
    out_csv: Option<PathBuf>,
) -> Result<(), CliError> {
    let formula = FORMULAS.iter().find(|f| f.name == formula_name).ok_or_else(|| {
        let names: Vec<&str> = FORMULAS.iter().map(|f| f.name).collect();
        CliError::Usage(format!(
            "unknown formula {formula_name:?}; valid names: {}",
            names.join(", ")
        ))
    })?;

    let mut grids: Vec<Vec<f64>> = vec![Vec::new(); formula.params.len()];
    let mut seen = vec![false; formula.params.len()];
    for spec in param_specs {
        let (key, values) = parse_param(spec)?;
        let idx = formula
            .params
            .iter()
            .position(|p| **p == key)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "formula {} has parameters {}, not {key:?}",
                    formula.name,
                    formula.params.join(", ")
                ))
            })?;
        grids[idx] = values;
        seen[idx] = true;
    }
    if let Some(missing) = formula.params.iter().zip(&seen).find(|(_, s)| !**s) {
        return Err(CliError::Usage(format!(
            "formula {} needs --param {}=...",
            formula.name, missing.0
        )));
    }

    let mut csv = String::new();
    csv.push_str(&formula.params.join(","));
    csv.push_str(",value,vacuous\n");

    // Cartesian product in row-major order over the declared parameters.
    let total: usize = grids.iter().map(|g| g.len()).product();
    for i in 0..total {
        let mut idx = i;
        let mut point = Vec::with_capacity(grids.len());
        for g in grids.iter().rev() {
            point.push(g[idx % g.len()]);
            idx /= g.len();
        }
        point.reverse();
        let value = (formula.eval)(&point).map_err(CliError::Usage)?;
        let cells: Vec<String> = point.iter().map(|v| fmt_real(*v)).collect();
        let line = format!(
            "{},{},{}\n",
            cells.join(","),
            fmt_real(value),
            bounds::is_vacuous(value)
        );
        csv.push_str(&line);
    }

    match out_csv {
        Some(path) => write_text(&path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
