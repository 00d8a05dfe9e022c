//! The five experiment runners. Each computes every sweep point before
//! anything is written, so a failure leaves the output directory untouched.

use num_complex::Complex64;
use rayon::prelude::*;

use anyonpt_core::hamiltonian::build_h_eff;
use anyonpt_core::laser::{map_to_anyonic, mode_locking_threshold};
use anyonpt_core::nonnormal::{
    g_infinity, g_t, poschl_teller_bound_state, poschl_teller_ground_state, self_orthogonality,
    AmplificationReport,
};
use anyonpt_core::output::fmt_num;
use anyonpt_core::propagation::evolve;
use anyonpt_core::scattering::{run_packet_scattering, stationary_rt, write_rt_csv, PacketSpec, ScatteringReport};
use anyonpt_core::spectra::{
    delocalization_margin, moving_bound_state, poschl_teller_energies, shifted_point_energy, solve_spectrum,
    stationary_bound_states, BoundState, DispersionCurve,
};
use anyonpt_core::{Grid, PotentialSpec, WaveFunction};

use crate::config::{Experiment, ExperimentConfig, SweepPoint};
use crate::{OutputSet, RunError};

/// Runs the configured experiment on a pool of `jobs` worker threads.
pub fn run(config: &ExperimentConfig, jobs: usize) -> Result<OutputSet, RunError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::io(format!("cannot start worker pool: {e}")))?;
    let mut out = pool.install(|| match config.experiment {
        Experiment::Spectrum => run_spectrum(config),
        Experiment::Delocalize => run_delocalize(config),
        Experiment::Scatter => run_scatter(config),
        Experiment::Amplify => run_amplify(config),
        Experiment::Lasermap => run_lasermap(config),
    })?;
    out.insert("config.resolved.toml", config.to_toml_string()?.into_bytes());
    Ok(out)
}

fn point_context(p: &SweepPoint) -> String {
    format!("sweep point {} (phi = {}, v = {})", p.index, p.params.phi(), p.params.v())
}

/// Runs `f` over the sweep points in parallel, keeping sweep order.
fn over_points<T, F>(points: &[SweepPoint], f: F) -> Result<Vec<T>, RunError>
where
    T: Send,
    F: Fn(&SweepPoint) -> Result<T, RunError> + Sync,
{
    points
        .par_iter()
        .map(|p| f(p).map_err(|e| e.context(point_context(p))))
        .collect()
}

fn potential_delta(spec: &PotentialSpec) -> f64 {
    match spec {
        PotentialSpec::PoschlTeller { delta, .. } | PotentialSpec::Barrier { delta, .. } => *delta,
        _ => f64::NAN,
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_else(|| "nan".to_string())
}

fn file_name(stem: &str, index: usize, ext: &str) -> String {
    format!("{stem}_{index:04}.{ext}")
}

/// Ground state of the stationary well, closed form where available.
fn stationary_ground(point: &SweepPoint, grid: &Grid) -> Result<Option<BoundState>, RunError> {
    match &point.potential {
        PotentialSpec::PoschlTeller { nu, delta } => {
            let wave = poschl_teller_ground_state(*nu, *delta, grid)?;
            Ok(Some(BoundState::new(wave, -nu * nu)?))
        }
        PotentialSpec::Zero => Ok(None),
        spec => Ok(stationary_bound_states(spec, grid)?.into_iter().next()),
    }
}

fn run_spectrum(config: &ExperimentConfig) -> Result<OutputSet, RunError> {
    let grid = config.grid_or_default();
    let opts = config.spectrum.clone().unwrap_or_default();
    let points = config.sweep_points()?;
    let results = over_points(&points, |p| {
        let boundary = config.boundary.resolve(&p.params);
        let h = build_h_eff(&p.potential, &p.params, &grid, boundary)?;
        let spectrum = solve_spectrum(&h)?;
        let mut files = OutputSet::new();
        let mut buf = Vec::new();
        spectrum.write_csv(&mut buf)?;
        files.insert(file_name("spectrum", p.index, "csv"), buf);
        let mut buf = Vec::new();
        DispersionCurve::symmetric(&p.params, opts.k_max, opts.dispersion_samples).write_csv(&mut buf)?;
        files.insert(file_name("dispersion", p.index, "csv"), buf);

        let mut analytic_rows = Vec::new();
        if let PotentialSpec::PoschlTeller { nu, .. } = &p.potential {
            for (n, e) in poschl_teller_energies(*nu)?.energies.iter().enumerate() {
                if delocalization_margin(*e, &p.params) <= 0.0 {
                    continue;
                }
                let target = shifted_point_energy(*e, &p.params);
                let nearest = spectrum.nearest(target).map(|j| spectrum.eigenvalues[j]);
                analytic_rows.push(vec![
                    p.index.to_string(),
                    (n + 1).to_string(),
                    fmt_num(target.re),
                    fmt_num(target.im),
                    opt_num(nearest.map(|z| z.re)),
                    opt_num(nearest.map(|z| z.im)),
                ]);
            }
        }
        let summary = vec![
            p.index.to_string(),
            fmt_num(p.params.phi()),
            fmt_num(p.params.v()),
            fmt_num(potential_delta(&p.potential)),
            format!("{boundary:?}").to_lowercase(),
            spectrum.len().to_string(),
            spectrum.point_count().to_string(),
        ];
        Ok((files, summary, analytic_rows))
    })?;
    let mut out = OutputSet::new();
    let mut summary = Vec::new();
    let mut analytic = Vec::new();
    for (files, row, rows) in results {
        out.extend(files);
        summary.push(row);
        analytic.extend(rows);
    }
    out.insert_csv(
        "summary.csv",
        &["index", "phi", "v", "delta", "boundary", "eigenvalues", "point_count"],
        summary,
    )?;
    out.insert_csv(
        "point_energies.csv",
        &["index", "n", "re_e_analytic", "im_e_analytic", "re_e_nearest", "im_e_nearest"],
        analytic,
    )?;
    Ok(out)
}

/// The same spacing on a box twice as long.
fn doubled(grid: &Grid) -> Result<Grid, RunError> {
    Ok(Grid::new(2.0 * grid.x_min(), 2.0 * grid.x_max(), 2 * grid.len())?)
}

fn run_delocalize(config: &ExperimentConfig) -> Result<OutputSet, RunError> {
    let base = config.grid_or_default();
    let opts = config.delocalize.clone().unwrap_or_default();
    let points = config.sweep_points()?;
    let results = over_points(&points, |p| {
        let grid = match p.v_over_vc {
            Some(f) if f >= opts.double_box_above => doubled(&base)?,
            _ => base.clone(),
        };
        let margin = p.e1.map(|e| delocalization_margin(e, &p.params));
        let moved: Option<WaveFunction> = match stationary_ground(p, &grid)? {
            Some(u) => moving_bound_state(&u, &p.params)?,
            None => None,
        };
        let target = p.e1.map(|e| shifted_point_energy(e, &p.params));

        let mut numeric: Option<(usize, f64, f64, Complex64, WaveFunction)> = None;
        if opts.numeric {
            let boundary = config.boundary.resolve(&p.params);
            let h = build_h_eff(&p.potential, &p.params, &grid, boundary)?;
            let spectrum = solve_spectrum(&h)?;
            let points_idx = spectrum.point_indices();
            let best = match target {
                Some(t) => points_idx.iter().copied().min_by(|&a, &b| {
                    (spectrum.eigenvalues[a] - t)
                        .norm()
                        .total_cmp(&(spectrum.eigenvalues[b] - t).norm())
                }),
                None => points_idx.first().copied(),
            };
            numeric = Some(match best {
                Some(j) => (
                    points_idx.len(),
                    spectrum.localization_length[j],
                    spectrum.participation_ratio[j],
                    spectrum.eigenvalues[j],
                    spectrum.eigenvectors[j].clone(),
                ),
                None => (
                    0,
                    f64::NAN,
                    f64::NAN,
                    Complex64::new(f64::NAN, f64::NAN),
                    WaveFunction::new(grid.clone(), vec![Complex64::new(0.0, 0.0); grid.len()])?,
                ),
            });
        }

        let mut files = OutputSet::new();
        let analytic_density = moved.as_ref().map(|w| w.density());
        let numeric_density = numeric.as_ref().filter(|n| n.0 > 0).map(|n| n.4.density());
        let rows = (0..grid.len()).map(|j| {
            vec![
                fmt_num(grid.x(j)),
                opt_num(analytic_density.as_ref().map(|d| d[j])),
                opt_num(numeric_density.as_ref().map(|d| d[j])),
            ]
        });
        files.insert_csv(
            file_name("profile", p.index, "csv"),
            &["x", "analytic_density", "numeric_density"],
            rows,
        )?;
        let analytic_length = margin.map(|m| if m > 0.0 { 1.0 / m } else { f64::INFINITY });
        let summary = vec![
            p.index.to_string(),
            fmt_num(p.params.phi()),
            fmt_num(p.params.v()),
            opt_num(p.v_over_vc),
            fmt_num(potential_delta(&p.potential)),
            fmt_num(grid.x_min()),
            fmt_num(grid.x_max()),
            opt_num(margin),
            numeric.as_ref().map(|n| n.0.to_string()).unwrap_or_else(|| "nan".into()),
            opt_num(numeric.as_ref().map(|n| n.1)),
            opt_num(numeric.as_ref().map(|n| n.2)),
            opt_num(numeric.as_ref().map(|n| n.3.re)),
            opt_num(numeric.as_ref().map(|n| n.3.im)),
            opt_num(analytic_length),
        ];
        Ok((files, summary))
    })?;
    let mut out = OutputSet::new();
    let mut summary = Vec::new();
    for (files, row) in results {
        out.extend(files);
        summary.push(row);
    }
    out.insert_csv(
        "delocalize.csv",
        &[
            "index",
            "phi",
            "v",
            "v_over_vc",
            "delta",
            "x_min",
            "x_max",
            "margin",
            "point_count",
            "localization_length",
            "participation_ratio",
            "re_e",
            "im_e",
            "analytic_localization_length",
        ],
        summary,
    )?;
    Ok(out)
}

fn run_scatter(config: &ExperimentConfig) -> Result<OutputSet, RunError> {
    let grid = config.grid_or_default();
    let opts = config.scatter.clone().ok_or_else(|| RunError::config("missing [scatter]"))?;
    let prop = config.propagator.clone().ok_or_else(|| RunError::config("missing [propagator]"))?;
    let ks = opts.k.values()?;
    let points = config.sweep_points()?;
    let mut cells: Vec<(usize, &SweepPoint, f64)> = Vec::with_capacity(points.len() * ks.len());
    for p in &points {
        for (j, &k) in ks.iter().enumerate() {
            cells.push((p.index * ks.len() + j, p, k));
        }
    }
    let results: Vec<(OutputSet, Vec<String>)> = cells
        .par_iter()
        .map(|&(index, p, k)| {
            let packet = PacketSpec { d: opts.d, w: opts.w, k };
            let (report, record) =
                run_packet_scattering(&p.potential, &p.params, &packet, &grid, &prop, opts.separatrix)
                    .map_err(|e| RunError::from(e).context(format!("{} with k = {k}", point_context(p))))?;
            let mut files = OutputSet::new();
            if opts.write_density {
                let mut buf = Vec::new();
                record.write_ndjson(&mut buf)?;
                files.insert(file_name("density", index, "ndjson"), buf);
            }
            let mut buf = Vec::new();
            record.write_norm_csv(&mut buf)?;
            files.insert(file_name("norm", index, "csv"), buf);
            let mut row = vec![index.to_string(), fmt_num(potential_delta(&p.potential))];
            row.extend(report.csv_record());
            Ok((files, row))
        })
        .collect::<Result<_, RunError>>()?;
    let mut out = OutputSet::new();
    let mut rows = Vec::new();
    for (files, row) in results {
        out.extend(files);
        rows.push(row);
    }
    let mut header = vec!["index", "delta"];
    header.extend(ScatteringReport::CSV_HEADER);
    out.insert_csv("scattering.csv", &header, rows)?;

    if let Some(axis) = &opts.rt_k {
        let rt_ks = axis.values()?;
        let tables = over_points(&points, |p| {
            let rows = rt_ks
                .iter()
                .map(|&k| stationary_rt(&p.potential, &p.params, k).map_err(RunError::from))
                .collect::<Result<Vec<_>, _>>()?;
            let mut buf = Vec::new();
            write_rt_csv(&rows, &mut buf)?;
            Ok((file_name("rt", p.index, "csv"), buf))
        })?;
        for (name, buf) in tables {
            out.insert(name, buf);
        }
    }
    Ok(out)
}

/// Summary of a bound-state evolution: peak excursion of the normalized density.
fn breakup_metrics(record: &anyonpt_core::propagation::EvolutionRecord) -> (Vec<Vec<String>>, f64, f64) {
    let x0 = record.snapshots[0].wave.peak_position();
    let mut rows = Vec::new();
    let mut max_shift = 0.0_f64;
    let mut max_abs = 0.0_f64;
    for s in &record.snapshots {
        let x = s.wave.peak_position();
        let peak = s.wave.max_abs().powi(2) / s.norm;
        max_shift = max_shift.max((x - x0).abs());
        max_abs = max_abs.max(x.abs());
        rows.push(vec![fmt_num(s.t), fmt_num(x), fmt_num(peak), fmt_num(s.norm)]);
    }
    (rows, max_shift, max_abs)
}

fn run_amplify(config: &ExperimentConfig) -> Result<OutputSet, RunError> {
    let grid = config.grid_or_default();
    let opts = config.amplify.clone().unwrap_or_default();
    let g_t_grid = match &opts.g_t_grid {
        Some(g) => g.clone(),
        None => Grid::new(-40.0, 40.0, 1024)?,
    };
    let points = config.sweep_points()?;
    let results = over_points(&points, |p| {
        let margin = p.e1.map(|e| delocalization_margin(e, &p.params));
        let positive = margin.is_some_and(|m| m > 0.0);
        let (g_inf, self_orth) = match &p.potential {
            PotentialSpec::PoschlTeller { .. } if positive => {
                let u = poschl_teller_bound_state(&p.potential, &p.params)?;
                (g_infinity(&u, &p.params)?, self_orthogonality(&u.wave)?)
            }
            _ => match stationary_ground(p, &grid)? {
                Some(u) if positive => (g_infinity(&u, &p.params)?, self_orthogonality(&u.wave)?),
                Some(u) => (f64::INFINITY, self_orthogonality(&u.wave)?),
                None => (f64::NAN, f64::NAN),
            },
        };
        let mut files = OutputSet::new();
        let mut samples = Vec::new();
        if !opts.g_t_times.is_empty() {
            let boundary = config.boundary.resolve(&p.params);
            let h = build_h_eff(&p.potential, &p.params, &g_t_grid, boundary)?;
            let e1 = p
                .e1
                .map(|e| shifted_point_energy(e, &p.params))
                .unwrap_or(Complex64::new(0.0, 0.0));
            for &t in &opts.g_t_times {
                samples.push((t, g_t(&h, e1, t)?));
            }
        }
        let report = AmplificationReport {
            phi: p.params.phi(),
            v: p.params.v(),
            delta: potential_delta(&p.potential),
            g_infinity: g_inf,
            g_t_samples: samples,
            self_orthogonality: self_orth,
            delocalization_margin: margin.unwrap_or(f64::NAN),
        };
        if !report.g_t_samples.is_empty() {
            let mut buf = Vec::new();
            report.write_g_t_csv(&mut buf)?;
            files.insert(file_name("g_t", p.index, "csv"), buf);
        }
        let mut breakup = None;
        if opts.evolve {
            let prop = config.propagator.as_ref().ok_or_else(|| RunError::config("missing [propagator]"))?;
            let u = stationary_ground(p, &grid)?
                .ok_or_else(|| RunError::numerical("no bound state to evolve"))?;
            let psi0 = moving_bound_state(&u, &p.params)?
                .ok_or_else(|| RunError::numerical("the bound state is delocalized at this drift"))?;
            let record = evolve(&psi0, &p.potential, &p.params, prop)?;
            let mut buf = Vec::new();
            record.write_ndjson(&mut buf)?;
            files.insert(file_name("evolution", p.index, "ndjson"), buf);
            let mut buf = Vec::new();
            record.write_norm_csv(&mut buf)?;
            files.insert(file_name("norm", p.index, "csv"), buf);
            let (rows, max_shift, max_abs) = breakup_metrics(&record);
            files.insert_csv(
                file_name("peak", p.index, "csv"),
                &["t", "peak_x", "peak_density", "norm"],
                rows,
            )?;
            breakup = Some(vec![
                p.index.to_string(),
                fmt_num(p.params.phi()),
                fmt_num(p.params.v()),
                opt_num(p.v_over_vc),
                fmt_num(max_shift),
                fmt_num(max_abs),
                (max_abs >= opts.breakup_radius).to_string(),
            ]);
        }
        let mut row = vec![p.index.to_string()];
        row.extend(report.csv_record());
        row.push(opt_num(p.v_over_vc));
        Ok((files, row, breakup))
    })?;
    let mut out = OutputSet::new();
    let mut rows = Vec::new();
    let mut breakups = Vec::new();
    for (files, row, b) in results {
        out.extend(files);
        rows.push(row);
        breakups.extend(b);
    }
    let mut header = vec!["index"];
    header.extend(AmplificationReport::CSV_HEADER);
    header.push("v_over_vc");
    out.insert_csv("amplification.csv", &header, rows)?;
    if opts.evolve {
        out.insert_csv(
            "breakup.csv",
            &["index", "phi", "v", "v_over_vc", "max_peak_shift", "max_abs_peak", "destroyed"],
            breakups,
        )?;
    }
    Ok(out)
}

fn run_lasermap(config: &ExperimentConfig) -> Result<OutputSet, RunError> {
    let laser = config.laser.as_ref().ok_or_else(|| RunError::config("missing [laser]"))?;
    let mapping = map_to_anyonic(&laser.cavity, laser.tol).map_err(|e| RunError::config(e.to_string()))?;
    let threshold = mode_locking_threshold(&laser.cavity, laser.e1).map_err(|e| RunError::config(e.to_string()))?;
    let mut out = OutputSet::new();
    out.insert_csv("mapping.csv", &mapping_header(), vec![mapping.csv_record(threshold)])?;
    if let Some(axis) = &laser.tm_over_tr {
        let rows = axis
            .values()?
            .into_iter()
            .map(|ratio| {
                let v = 1.0 - ratio;
                let locked = threshold.is_none_or(|t| v.abs() < t);
                vec![
                    fmt_num(ratio),
                    fmt_num(v),
                    threshold.map(fmt_num).unwrap_or_else(|| "inf".into()),
                    locked.to_string(),
                ]
            })
            .collect::<Vec<_>>();
        out.insert_csv("thresholds.csv", &["tm_over_tr", "v", "threshold", "mode_locked"], rows)?;
    }
    Ok(out)
}

fn mapping_header() -> Vec<&'static str> {
    anyonpt_core::laser::LaserMapping::CSV_HEADER.to_vec()
}
