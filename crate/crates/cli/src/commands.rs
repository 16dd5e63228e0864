use std::io::Write;
use std::path::{Path, PathBuf};

use gpc_core::ansatz::verify_odd_suppression;
use gpc_core::fock::BasisSpec;
use gpc_core::gpc::{
    builtin_table, effective_configurations, effective_configurations_in_sector, evaluate_gpc,
    parse_constraints, pinning_report, GPCTable, PinningTolerances,
};
use gpc_core::rdm::{self, CIVector, OccupationSpectrum};
use gpc_core::sampling::{random_civector, random_pinned_general, random_unitary};
use gpc_core::toyci::{self, parse_hamiltonian, parse_manifest};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::formats::{parse_index_list, parse_shape, parse_spectra, scan_csv, sha256_hex, CiFile};
use crate::report::{
    constraint_values, AnalysisReport, BasisInfo, EffectiveDeterminant, EffectiveReport,
    SpectrumEntry, SpectrumReport, VerifySummary, SCHEMA_VERSION,
};
use crate::{Cli, CliError, Command, TableArgs, ToleranceArgs, EXIT_VIOLATION};

type Out<'a> = &'a mut dyn Write;

/// Runs one command, writing results to `out` and warnings to `err`.
/// Returns the process exit code; errors map to exit code 1.
pub fn run(cli: Cli, out: Out, err: Out) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze {
            ci_file,
            table,
            tol,
            norm_tol,
            json,
        } => analyze(&ci_file, &table, &tol, norm_tol, json.as_deref(), out),
        Command::Spectrum {
            non_file,
            table,
            electrons,
            tol,
            json,
        } => spectrum(
            &non_file,
            &table,
            electrons,
            &tol,
            json.as_deref(),
            out,
            err,
        ),
        Command::Effective {
            table,
            electrons,
            rank,
            saturated,
            spins,
            two_sz,
            json,
        } => effective(
            &table,
            electrons,
            rank,
            saturated.as_deref(),
            spins.as_deref().zip(two_sz),
            json.as_deref(),
            out,
        ),
        Command::Verify {
            trials,
            rank,
            seed,
            tol,
            json,
        } => verify(trials, rank, seed, tol, json.as_deref(), out),
        Command::Scan {
            manifest,
            table,
            tol,
            csv,
        } => scan(&manifest, &table, &tol, csv.as_deref(), out, err),
        Command::Rotate {
            ci_file,
            norm_tol,
            out: dest,
        } => rotate(&ci_file, norm_tol, dest.as_deref(), out, err),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(io_err(path))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path)?)
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
        text.push('\n');
        write_text(path, &text)?;
    }
    Ok(())
}

fn emit(out: Out, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(io_err(Path::new("<stdout>")))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        emit($out, format_args!($($arg)*))?
    };
}

fn tolerances(args: &ToleranceArgs) -> Result<PinningTolerances, CliError> {
    let t = PinningTolerances {
        pin: args.pin_tol,
        quasi: args.quasi_tol,
        violation: args.violation_tol,
    };
    if !(t.pin >= 0.0 && t.quasi >= t.pin && t.violation >= 0.0) {
        return Err(CliError::Input(
            "tolerances must satisfy 0 <= pin-tol <= quasi-tol".into(),
        ));
    }
    Ok(t)
}

/// Table from `--table` or `--constraints`; `shape` supplies `(n, m)` when
/// the input fixes them.
fn resolve_table(args: &TableArgs, shape: Option<(usize, usize)>) -> Result<GPCTable, CliError> {
    match (&args.table, &args.constraints, shape) {
        (Some(spec), _, _) => {
            let (n, m) = parse_shape(spec)?;
            if let Some((sn, sm)) = shape {
                if (sn, sm) != (n, m) {
                    return Err(CliError::Input(format!(
                        "table ({n},{m}) does not match the input's ({sn},{sm})"
                    )));
                }
            }
            Ok(builtin_table(n, m)?)
        }
        (None, Some(path), Some((n, m))) => {
            let constraints = parse_constraints(&read_text(path)?, m)?;
            Ok(GPCTable::custom(n, m, constraints)?)
        }
        (None, Some(_), None) => Err(CliError::Input(
            "--constraints needs the electron count and rank".into(),
        )),
        (None, None, Some((n, m))) => Ok(builtin_table(n, m)?),
        (None, None, None) => Err(CliError::Input("give --table n,m or --constraints".into())),
    }
}

fn load_normalized(path: &Path, norm_tol: f64) -> Result<(Vec<u8>, f64, CIVector), CliError> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))?;
    let mut psi = CiFile::parse(text)?.to_civector()?;
    let norm = psi.norm_sqr().sqrt();
    if (norm - 1.0).abs() > norm_tol {
        return Err(CliError::Input(format!(
            "CI vector norm {norm} differs from 1 by more than {norm_tol}"
        )));
    }
    psi.normalize()?;
    Ok((bytes, norm, psi))
}

fn analyze(
    path: &Path,
    table_args: &TableArgs,
    tol: &ToleranceArgs,
    norm_tol: f64,
    json: Option<&Path>,
    out: Out,
) -> Result<i32, CliError> {
    let tolerances = tolerances(tol)?;
    let (bytes, norm, psi) = load_normalized(path, norm_tol)?;
    let (n, m) = (psi.basis().n(), psi.basis().m());
    let table = resolve_table(table_args, Some((n, m)))?;
    let gamma = rdm::compute_1rdm(&psi)?;
    let frame = rdm::diagonalize(&gamma, rdm::DEGENERACY_TOL)?;
    let pinning = pinning_report(&frame.spectrum, &table, &tolerances, frame.any_degenerate())?;
    let natural = rdm::rotate_to_natural_basis(&psi, &frame)?;
    let report = AnalysisReport::new(
        sha256_hex(&bytes),
        norm,
        &frame,
        &table,
        &tolerances,
        &pinning,
        natural.excitation_norms(),
    );

    say!(
        out,
        "input {} (sha256 {})",
        path.display(),
        report.input_sha256
    );
    say!(out, "basis n={n} m={m}, input norm {norm}");
    say!(out, "occupations {}", join(&report.occupations));
    if report.degenerate {
        say!(
            out,
            "warning: degenerate occupations; natural orbitals are not unique"
        );
    }
    for (c, v) in table.constraints.iter().zip(&report.constraints) {
        say!(out, "{c}  value {:e}  {}", v.value, v.status);
    }
    let norms: Vec<String> = report
        .excitation_norms
        .iter()
        .enumerate()
        .map(|(k, w)| format!("{k}:{w:e}"))
        .collect();
    say!(out, "excitation weights {}", norms.join(" "));
    write_json(json, &report)?;
    Ok(if report.any_violated {
        EXIT_VIOLATION
    } else {
        0
    })
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn spectrum(
    path: &Path,
    table_args: &TableArgs,
    electrons: Option<usize>,
    tol: &ToleranceArgs,
    json: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<i32, CliError> {
    let tolerances = tolerances(tol)?;
    let lines = parse_spectra(&read_text(path)?)?;
    let m = lines[0].values.len();
    let shape = match (&table_args.table, electrons) {
        (None, Some(n)) => Some((n, m)),
        (None, None) => Some(((lines[0].values.iter().sum::<f64>()).round() as usize, m)),
        (Some(_), _) => None,
    };
    let table = resolve_table(table_args, shape)?;
    let mut entries = Vec::new();
    let mut violated = false;
    for line in &lines {
        if line.values.len() != table.m {
            return Err(CliError::Input(format!(
                "line {}: expected {} occupations, found {}",
                line.line,
                table.m,
                line.values.len()
            )));
        }
        if !line.was_sorted {
            say!(
                err,
                "warning: line {} was not descending and has been sorted",
                line.line
            );
        }
        let spec = OccupationSpectrum::from_unsorted(&line.values);
        let degenerate = spec
            .degeneracy_flags(rdm::DEGENERACY_TOL)
            .iter()
            .any(|&f| f);
        let report = pinning_report(&spec, &table, &tolerances, degenerate)?;
        violated |= report.any_violated();
        say!(out, "line {}: {}", line.line, join(&spec.values));
        for e in &report.entries {
            say!(out, "  {:<10} {:>14.6e}  {}", e.label, e.value, e.status);
        }
        entries.push(SpectrumEntry {
            line: line.line,
            occupations: spec.values.clone(),
            resorted: !line.was_sorted,
            degenerate,
            constraints: constraint_values(&report),
        });
    }
    write_json(
        json,
        &SpectrumReport {
            schema_version: SCHEMA_VERSION,
            table: (&table).into(),
            tolerances: (&tolerances).into(),
            spectra: entries,
        },
    )?;
    Ok(if violated { EXIT_VIOLATION } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn effective(
    table_args: &TableArgs,
    electrons: Option<usize>,
    rank: Option<usize>,
    saturated: Option<&str>,
    sector: Option<(&str, i32)>,
    json: Option<&Path>,
    out: Out,
) -> Result<i32, CliError> {
    let table = resolve_table(table_args, electrons.zip(rank))?;
    let constraints = match saturated {
        Some(list) => table.select(&parse_index_list(list)?)?,
        None => table.constraints.clone(),
    };
    let (dets, twice_sz) = match sector {
        Some((spins, twice_sz)) => {
            let basis = BasisSpec::with_spin_string(table.n, table.m, spins)?;
            (
                effective_configurations_in_sector(&constraints, &basis, twice_sz)?,
                Some(twice_sz),
            )
        }
        None => (
            effective_configurations(&constraints, &BasisSpec::new(table.n, table.m)?)?,
            None,
        ),
    };
    let reference = BasisSpec::new(table.n, table.m)?.reference();
    let mut listed = Vec::with_capacity(dets.len());
    for d in &dets {
        let order = d.excitation_order(&reference)?;
        say!(out, "{d} {order}");
        listed.push(EffectiveDeterminant {
            orbitals: d.orbitals(),
            excitation_order: order,
        });
    }
    say!(out, "{} determinants", dets.len());
    write_json(
        json,
        &EffectiveReport {
            schema_version: SCHEMA_VERSION,
            basis: BasisInfo {
                n: table.n,
                m: table.m,
            },
            saturated: constraints.iter().map(|c| c.label.clone()).collect(),
            twice_sz,
            determinants: listed,
        },
    )?;
    Ok(0)
}

/// Runs the odd-excitation and membership harness without printing.
pub fn verify_summary(
    trials: usize,
    rank: usize,
    seed: u64,
    tol: f64,
) -> Result<VerifySummary, CliError> {
    if rank < 6 {
        return Err(CliError::Input(format!("rank {rank} below 6")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = VerifySummary {
        schema_version: SCHEMA_VERSION,
        rank,
        trials,
        seed,
        tol,
        degenerate_trials: 0,
        max_odd_norm: 0.0,
        max_bd_residual: 0.0,
        theorem_failures: 0,
        membership_table: None,
        min_constraint_value: None,
        membership_failures: 0,
        passed: true,
    };
    for _ in 0..trials {
        let psi = gpc_core::ansatz::build_pinned_general(&random_pinned_general(rank, &mut rng)?)?;
        let scrambled = rdm::rotate(&psi, &random_unitary(rank, &mut rng))?;
        let report = verify_odd_suppression(&scrambled, tol)?;
        if report.degenerate {
            summary.degenerate_trials += 1;
            continue;
        }
        summary.max_odd_norm = summary.max_odd_norm.max(report.odd_norm);
        summary.max_bd_residual = summary.max_bd_residual.max(report.bd_residual.abs());
        if report.odd_norm > tol || report.bd_residual.abs() > tol {
            summary.theorem_failures += 1;
        }
    }
    if let Ok(table) = builtin_table(3, rank) {
        summary.membership_table = Some(format!("(3,{rank})"));
        let basis = BasisSpec::new(3, rank)?;
        for _ in 0..trials {
            let psi = random_civector(&basis, &mut rng)?;
            let frame = rdm::diagonalize(&rdm::compute_1rdm(&psi)?, rdm::DEGENERACY_TOL)?;
            for d in evaluate_gpc(&frame.spectrum, &table)? {
                let min = summary.min_constraint_value.map_or(d, |v| v.min(d));
                summary.min_constraint_value = Some(min);
                if d < -tol {
                    summary.membership_failures += 1;
                }
            }
        }
    }
    summary.passed = summary.theorem_failures == 0 && summary.membership_failures == 0;
    Ok(summary)
}

fn verify(
    trials: usize,
    rank: usize,
    seed: u64,
    tol: f64,
    json: Option<&Path>,
    out: Out,
) -> Result<i32, CliError> {
    let s = verify_summary(trials, rank, seed, tol)?;
    say!(
        out,
        "rank {rank}, {trials} trials, seed {seed}, tol {tol:e}"
    );
    say!(
        out,
        "odd suppression: max odd weight {:e}, max |1 + n3 - n1 - n2| {:e}, {} degenerate skipped, {} failures",
        s.max_odd_norm,
        s.max_bd_residual,
        s.degenerate_trials,
        s.theorem_failures
    );
    match (&s.membership_table, s.min_constraint_value) {
        (Some(t), Some(min)) => say!(
            out,
            "membership {t}: min value {min:e}, {} failures",
            s.membership_failures
        ),
        (Some(t), None) => say!(out, "membership {t}: no trials"),
        (None, _) => say!(out, "membership: no builtin table for (3,{rank}), skipped"),
    }
    say!(out, "{}", if s.passed { "PASS" } else { "FAIL" });
    write_json(json, &s)?;
    Ok(if s.passed { 0 } else { EXIT_VIOLATION })
}

fn scan(
    manifest: &Path,
    table_args: &TableArgs,
    tol: &ToleranceArgs,
    csv: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<i32, CliError> {
    let tolerances = tolerances(tol)?;
    let entries = parse_manifest(&read_text(manifest)?)?;
    let dir = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut family = Vec::with_capacity(entries.len());
    for (param, rel) in entries {
        let path: PathBuf = dir.join(rel);
        let h = parse_hamiltonian(&read_text(&path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        family.push((param, h));
    }
    let Some((_, first)) = family.first() else {
        return Err(CliError::Input("manifest lists no points".into()));
    };
    let table = resolve_table(table_args, Some((first.basis().n(), first.basis().m())))?;
    let result = toyci::scan(&family, &table, &tolerances)?;
    let mut violated = false;
    for row in &result.rows {
        match &row.outcome {
            Ok(point) => violated |= point.statuses.contains(&gpc_core::PinningStatus::Violated),
            Err(e) => say!(err, "warning: point {} failed: {e}", row.param),
        }
    }
    let text = scan_csv(&result);
    match csv {
        Some(path) => write_text(path, &text)?,
        None => out
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(if violated { EXIT_VIOLATION } else { 0 })
}

fn rotate(
    path: &Path,
    norm_tol: f64,
    dest: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<i32, CliError> {
    let (_, _, psi) = load_normalized(path, norm_tol)?;
    let frame = rdm::diagonalize(&rdm::compute_1rdm(&psi)?, rdm::DEGENERACY_TOL)?;
    let natural = rdm::rotate_to_natural_basis(&psi, &frame)?;
    let text = CiFile::from_civector(&natural).to_json() + "\n";
    say!(err, "occupations {}", join(&frame.spectrum.values));
    match dest {
        Some(p) => write_text(p, &text)?,
        None => out
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(0)
}
