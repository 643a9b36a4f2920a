//! Implementations of the four subcommands.

use std::path::Path;

use chrono::Datelike;

use uipdyn::dynreg::{
    fit_dynreg, fit_rdynreg, lr_test, rolling_estimate, select_p, static_fit_on_trimmed,
    RollingEstimator, RollingPoint, DEFAULT_P_MAX,
};
use uipdyn::hac::{cov_estimate, HacConfig};
use uipdyn::maproc::{invert, overlap_autocorrelations, spectral_factorize, OverlapSpec};
use uipdyn::montecarlo::{
    calibrate_sigma2, normalize_methods, run_experiment, size_corrected_power, McConfig, McMethod,
    SpotSource,
};
use uipdyn::ols::{normal_two_sided_p, ols_fit, t_test, CovMethod};
use uipdyn::series::{
    align, build_sample, load_csv, rolling_windows, CsvSchema, Design, RegressionSample,
};

use crate::config::{parse_sim_config, SimConfig};
use crate::manifest::RunManifest;
use crate::report::{csv_table, opt_dash, opt_sig6, sig6, text_table};
use crate::svg::{LinePlot, Series, PALETTE};
use crate::{AppError, DataArgs, EstimateArgs, FactorizeArgs, RollArgs, SimulateArgs};

type CmdResult = Result<(), AppError>;

fn ensure_out_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

struct LoadedSample {
    sample: RegressionSample,
    design: Design,
    overlap: OverlapSpec,
    schema: CsvSchema,
}

fn load_sample(args: &DataArgs) -> Result<LoadedSample, AppError> {
    let design: Design = args
        .design
        .parse()
        .map_err(|e: uipdyn::Error| AppError::usage(e.to_string()))?;
    if args.k == 0 {
        return Err(AppError::usage("k must be at least 1"));
    }
    let schema = CsvSchema {
        date: args.date_col.clone(),
        spot: args.spot_col.clone(),
        forward: args.forward_col.clone(),
    };
    let quotes = load_csv(&args.data, &schema)?;
    let series = align(&quotes, args.k)?;
    let contract_days = args
        .contract_days
        .unwrap_or(5 * args.k as u32 + 2);
    let overlap = OverlapSpec::new(contract_days, args.days_per_period)
        .map_err(|e| AppError::usage(e.to_string()))?;
    Ok(LoadedSample {
        sample: build_sample(&series, design),
        design,
        overlap,
        schema,
    })
}

pub fn estimate(args: EstimateArgs) -> CmdResult {
    let loaded = load_sample(&args.data)?;
    let methods = normalize_methods(&args.methods).map_err(|e| AppError::usage(e.to_string()))?;
    let sample = &loaded.sample;
    let null = loaded.design.null_beta();
    let k = sample.k();

    // method, beta, se, t, p, lambda_lr (lambda only on the DynReg row).
    let mut rows: Vec<(McMethod, Option<f64>, f64, f64, f64, Option<f64>)> = Vec::new();
    let needs_static = methods.iter().any(|m| m.shares_ols_estimate() || *m == McMethod::Ols);
    let static_fit = if needs_static { Some(ols_fit(sample)?) } else { None };

    for method in &methods {
        match method {
            McMethod::DynReg => {
                let p = select_p(sample, DEFAULT_P_MAX)?;
                let fit = fit_dynreg(sample, p)?;
                let static_trimmed = static_fit_on_trimmed(sample, p)?;
                let lr = lr_test(&static_trimmed, &fit)?;
                let t = fit.long_run_t(null);
                rows.push((
                    *method,
                    Some(fit.long_run_beta),
                    fit.long_run_se,
                    t,
                    normal_two_sided_p(t),
                    Some(lr.lambda),
                ));
            }
            McMethod::RDynReg => {
                let theta = spectral_factorize(
                    &overlap_autocorrelations(&loaded.overlap),
                    loaded.overlap.ma_order(),
                )?;
                let fit = fit_rdynreg(sample, &theta)?;
                let t = fit.t_stat(null);
                rows.push((
                    *method,
                    Some(fit.beta),
                    fit.se_beta,
                    t,
                    normal_two_sided_p(t),
                    None,
                ));
            }
            other => {
                let fit = static_fit.as_ref().expect("static fit prepared");
                let cov_method = match other {
                    McMethod::Ols => CovMethod::Ols,
                    McMethod::OlsHh => CovMethod::Hh,
                    McMethod::OlsNw => CovMethod::Nw,
                    McMethod::OlsAndrews => CovMethod::Andrews,
                    McMethod::OlsKv => CovMethod::Kv,
                    McMethod::OlsEwc => CovMethod::Ewc,
                    _ => unreachable!(),
                };
                let cov = cov_estimate(fit, k, &HacConfig::new(cov_method))?;
                let test = t_test(fit, &cov, 1, null)?;
                // Only the OLS row owns the shared point estimate.
                let beta = if *other == McMethod::Ols {
                    Some(test.estimate)
                } else {
                    None
                };
                rows.push((*method, beta, test.se, test.t_stat, test.p_value, None));
            }
        }
    }

    ensure_out_dir(&args.out_dir)?;
    let header = ["method", "beta", "se", "t_stat", "p_value", "lambda_lr"];
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(m, beta, se, t, p, lr)| {
            vec![
                m.label().to_string(),
                opt_sig6(*beta),
                sig6(*se),
                sig6(*t),
                sig6(*p),
                opt_sig6(*lr),
            ]
        })
        .collect();
    let text_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(m, beta, se, t, p, lr)| {
            vec![
                m.label().to_string(),
                opt_dash(*beta),
                sig6(*se),
                sig6(*t),
                sig6(*p),
                opt_dash(*lr),
            ]
        })
        .collect();
    std::fs::write(args.out_dir.join("report.csv"), csv_table(&header, &csv_rows))?;
    let mut text = format!(
        "Estimation of the {} regression (k = {k}, n = {}, null beta = {null})\n\n",
        loaded.design,
        sample.len()
    );
    text.push_str(&text_table(&header, &text_rows));
    std::fs::write(args.out_dir.join("report.txt"), &text)?;
    print!("{text}");

    let mut manifest = RunManifest::new(
        "estimate",
        serde_json::json!({
            "data": args.data.data.display().to_string(),
            "design": loaded.design.to_string(),
            "k": k,
            "methods": methods.iter().map(|m| m.label()).collect::<Vec<_>>(),
            "schema": loaded.schema,
            "contract_days": loaded.overlap.contract_days,
            "days_per_period": loaded.overlap.days_per_period,
        }),
        None,
    );
    manifest.hash_input(&args.data.data)?;
    manifest.write(&args.out_dir)?;
    Ok(())
}

fn mc_config_from(sim: &SimConfig) -> Result<McConfig, AppError> {
    let overlap = OverlapSpec::new(sim.contract_days, sim.days_per_period)
        .map_err(|e| AppError::usage(e.to_string()))?;
    let theta = spectral_factorize(&overlap_autocorrelations(&overlap), overlap.ma_order())?;
    let k = overlap.ma_order().max(1);
    let mut config = McConfig {
        t: sim.t,
        reps: sim.reps,
        k,
        theta,
        true_beta: sim.design.null_beta(),
        spot: SpotSource::Synthetic {
            weekly_sd: sim.weekly_sd,
        },
        seed: sim.seed,
        design: sim.design,
        p_max: DEFAULT_P_MAX,
    };
    config.validate().map_err(|e| AppError::usage(e.to_string()))?;
    let sigma2 = match sim.sigma2 {
        Some(s) => s,
        None => calibrate_sigma2(&config)?,
    };
    config.theta = config.theta.with_sigma2(sigma2);
    Ok(config)
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.config)?;
    let mut sim = parse_sim_config(&text).map_err(AppError::usage)?;
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    let config = mc_config_from(&sim)?;

    let table = run_experiment(&config, &McMethod::ALL)?;

    ensure_out_dir(&args.out_dir)?;
    // Long-form CSV: one row per method and metric.
    let mut rows: Vec<Vec<String>> = Vec::new();
    for r in &table.records {
        let mut push = |metric: &str, value: Option<f64>| {
            rows.push(vec![
                r.method.label().to_string(),
                metric.to_string(),
                value.map(sig6).unwrap_or_default(),
            ]);
        };
        push("bias", r.bias);
        push("mse", r.mse);
        push("size_5pct", Some(r.size_5pct));
    }
    rows.push(vec![
        "(all)".to_string(),
        "mc_se_size".to_string(),
        sig6(table.mc_se_size),
    ]);

    // Size-corrected power for the four figure methods.
    let power_methods = [
        McMethod::Ols,
        McMethod::OlsNw,
        McMethod::OlsKv,
        McMethod::RDynReg,
    ];
    let power = if sim.power {
        let mut power_config = config.clone();
        power_config.reps = sim.power_reps;
        let result = size_corrected_power(&power_config, &sim.alternatives, &power_methods)?;
        for curve in &result.power_grid {
            for (beta, p) in &curve.points {
                rows.push(vec![
                    curve.method.label().to_string(),
                    format!("power@{beta}"),
                    sig6(*p),
                ]);
            }
        }
        Some(result)
    } else {
        None
    };
    std::fs::write(
        args.out_dir.join("report.csv"),
        csv_table(&["method", "metric", "value"], &rows),
    )?;

    let text_rows: Vec<Vec<String>> = table
        .records
        .iter()
        .map(|r| {
            vec![
                r.method.label().to_string(),
                opt_dash(r.bias),
                opt_dash(r.mse),
                sig6(r.size_5pct),
            ]
        })
        .collect();
    let mut text = format!(
        "Monte Carlo performance of tests of beta = {} ({} design, T = {}, {} replications)\n\n",
        config.design.null_beta(),
        config.design,
        config.t,
        table.reps_used
    );
    text.push_str(&text_table(&["method", "bias", "mse", "size_5pct"], &text_rows));
    text.push_str(&format!(
        "\nMonte Carlo se of a 5% rejection rate: {}\n",
        sig6(table.mc_se_size)
    ));
    std::fs::write(args.out_dir.join("report.txt"), &text)?;
    print!("{text}");

    if let Some(result) = &power {
        let mut plot = LinePlot {
            title: format!(
                "Size-corrected power, T = {} ({} design)",
                config.t, config.design
            ),
            x_label: "generated beta (offset from null)".to_string(),
            y_label: "rejection rate".to_string(),
            series: Vec::new(),
        };
        for (i, curve) in result.power_grid.iter().enumerate() {
            plot.series.push(Series {
                name: curve.method.label().to_string(),
                points: curve.points.clone(),
                color: PALETTE[i % PALETTE.len()],
                dashed: false,
            });
        }
        let xs: Vec<f64> = sim.alternatives.clone();
        plot.series.push(Series {
            name: String::new(),
            points: xs.iter().map(|x| (*x, 0.05)).collect(),
            color: "#888888",
            dashed: true,
        });
        std::fs::write(args.out_dir.join("power.svg"), plot.render())?;
    }

    let summary = serde_json::json!({
        "config": sim,
        "seed": sim.seed,
        "sigma2": config.theta.sigma2(),
        "table": table,
        "power": power,
    });
    std::fs::write(
        args.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;

    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::to_value(&sim).expect("config serializes"),
        Some(sim.seed),
    );
    manifest.hash_input(&args.config)?;
    manifest.write(&args.out_dir)?;
    Ok(())
}

fn date_x(d: chrono::NaiveDate) -> f64 {
    d.year() as f64 + (d.ordinal0() as f64) / 365.25
}

pub fn roll(args: RollArgs) -> CmdResult {
    let loaded = load_sample(&args.data)?;
    let sample = &loaded.sample;
    let windows = rolling_windows(sample, args.window, args.step)?;
    let null = loaded.design.null_beta();

    let estimators: Vec<String> = args
        .estimators
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .filter(|s| !s.is_empty())
        .collect();
    if estimators.is_empty() {
        return Err(AppError::usage("no estimators requested"));
    }

    let theta = spectral_factorize(
        &overlap_autocorrelations(&loaded.overlap),
        loaded.overlap.ma_order(),
    )?;
    let mut results: Vec<(String, Vec<RollingPoint>)> = Vec::new();
    for name in &estimators {
        let spec = match name.as_str() {
            "ols" => RollingEstimator::Ols(HacConfig::new(CovMethod::Hh)),
            "dynreg" => RollingEstimator::DynReg { p_max: DEFAULT_P_MAX },
            "rdynreg" => RollingEstimator::RDynReg(theta.clone()),
            other => return Err(AppError::usage(format!("unknown estimator {other:?}"))),
        };
        results.push((name.clone(), rolling_estimate(&windows, &spec)));
    }

    ensure_out_dir(&args.out_dir)?;
    let mut header: Vec<String> = vec!["window_start".into(), "window_end".into()];
    for (name, _) in &results {
        header.push(format!("{name}_beta"));
        header.push(format!("{name}_se"));
        header.push(format!("{name}_lo95"));
        header.push(format!("{name}_hi95"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (w, _) in windows.iter().enumerate() {
        let mut row = vec![
            results[0].1[w].start.to_string(),
            results[0].1[w].end.to_string(),
        ];
        for (_, pts) in &results {
            let p = &pts[w];
            row.push(opt_sig6(p.estimate));
            row.push(opt_sig6(p.se));
            match p.band() {
                Some((lo, hi)) => {
                    row.push(sig6(lo));
                    row.push(sig6(hi));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        rows.push(row);
    }
    std::fs::write(args.out_dir.join("report.csv"), csv_table(&header_refs, &rows))?;

    for (i, (name, pts)) in results.iter().enumerate() {
        let estimate: Vec<(f64, f64)> = pts
            .iter()
            .filter_map(|p| p.estimate.map(|e| (date_x(p.end), e)))
            .collect();
        let lo: Vec<(f64, f64)> = pts
            .iter()
            .filter_map(|p| p.band().map(|(l, _)| (date_x(p.end), l)))
            .collect();
        let hi: Vec<(f64, f64)> = pts
            .iter()
            .filter_map(|p| p.band().map(|(_, h)| (date_x(p.end), h)))
            .collect();
        let x_range: Vec<f64> = pts.iter().map(|p| date_x(p.end)).collect();
        let plot = LinePlot {
            title: format!(
                "{}-window rolling {} beta ({} design)",
                args.window, name, loaded.design
            ),
            x_label: "window end".to_string(),
            y_label: "beta".to_string(),
            series: vec![
                Series {
                    name: name.clone(),
                    points: estimate,
                    color: PALETTE[(i + 1) % PALETTE.len()],
                    dashed: false,
                },
                Series {
                    name: "95% band".to_string(),
                    points: lo,
                    color: "#555555",
                    dashed: true,
                },
                Series {
                    name: String::new(),
                    points: hi,
                    color: "#555555",
                    dashed: true,
                },
                Series {
                    name: format!("null beta = {null}"),
                    points: x_range.iter().map(|x| (*x, null)).collect(),
                    color: "#000000",
                    dashed: true,
                },
            ],
        };
        std::fs::write(args.out_dir.join(format!("rolling_{name}.svg")), plot.render())?;
    }

    let mut manifest = RunManifest::new(
        "roll",
        serde_json::json!({
            "data": args.data.data.display().to_string(),
            "design": loaded.design.to_string(),
            "k": sample.k(),
            "window": args.window,
            "step": args.step,
            "estimators": estimators,
        }),
        None,
    );
    manifest.hash_input(&args.data.data)?;
    manifest.write(&args.out_dir)?;
    println!(
        "wrote {} windows for {} estimator(s) to {}",
        windows.len(),
        results.len(),
        args.out_dir.display()
    );
    Ok(())
}

pub fn factorize(args: FactorizeArgs) -> CmdResult {
    let overlap = OverlapSpec::new(args.contract_days, args.days_per_period)
        .map_err(|e| AppError::usage(e.to_string()))?;
    let rho = overlap_autocorrelations(&overlap);
    let m = overlap.ma_order();

    let mut text = format!(
        "Overlap: {} contract days, {} days per period, MA order {m}\n",
        args.contract_days, args.days_per_period
    );
    text.push_str(&format!(
        "autocorrelations: [{}]\n",
        rho.iter().map(|r| sig6(*r)).collect::<Vec<_>>().join(", ")
    ));
    let theta = spectral_factorize(&rho, m)?;
    text.push_str(&format!(
        "theta coefficients: [{}]\n",
        theta
            .coeffs()
            .iter()
            .map(|c| sig6(*c))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    text.push_str(&format!(
        "variance ratio sum c_j^2: {}\n",
        sig6(theta.variance_ratio())
    ));
    let filt = invert(&theta, uipdyn::maproc::DEFAULT_INVERT_TOL)?;
    text.push_str(&format!(
        "ar filter weights: [{}]\n",
        filt.weights()
            .iter()
            .map(|w| sig6(*w))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    text.push_str(&format!(
        "truncation lag: {} (declared tail bound {})\n",
        filt.truncation_p(),
        sig6(filt.truncation_error())
    ));
    print!("{text}");

    ensure_out_dir(&args.out_dir)?;
    std::fs::write(args.out_dir.join("report.txt"), &text)?;
    let manifest = RunManifest::new(
        "factorize",
        serde_json::json!({
            "contract_days": args.contract_days,
            "days_per_period": args.days_per_period,
        }),
        None,
    );
    manifest.write(&args.out_dir)?;
    Ok(())
}
