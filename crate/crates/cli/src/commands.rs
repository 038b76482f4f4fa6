use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qperc_core::experiments::{
    cluster_density_profile, continuity_probe, convergence_study, estimate_ids, ids_jumps,
    linspace, log_hoelder_check, wegner_experiment, EmpiricalIDS, EnergyPoint, Estimator,
    ExperimentParams, JumpEstimate, Restriction, DEFAULTS,
};
use qperc_core::percolation::enumerate_connected_subgraphs;
use qperc_core::spectra::{
    cluster_spectrum_catalog, mirror_embed, AlgebraicNumber, FiniteSpectrumCatalog,
};
use qperc_core::{HoppingKernel, PotentialDistribution, SiteSet};

use crate::args::{Cli, Command, Common};
use crate::output::{io_err, now, num, opt, Manifest, Output};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| usage(format!("cannot parse {what} '{s}'")))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|x| parse_f64(x, what)).collect()
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("{what} must look like lo:hi, got '{s}'")))?;
    Ok((parse_f64(a, what)?, parse_f64(b, what)?))
}

fn json_arg(s: &str) -> Result<Value, CliError> {
    let text = if s.trim_start().starts_with(['{', '[', '"']) {
        s.to_string()
    } else {
        fs::read_to_string(s).map_err(|e| io_err(Path::new(s), e))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid JSON in '{s}': {e}")))
}

fn distribution(c: &Common) -> Result<PotentialDistribution, CliError> {
    match (&c.dist, c.p) {
        (Some(d), _) => {
            let v = json_arg(d)?;
            serde_json::from_value(v).map_err(|e| usage(format!("distribution: {e}")))
        }
        (None, Some(p)) => Ok(PotentialDistribution::bernoulli(p)?),
        (None, None) => Err(usage("one of --dist or --p is required")),
    }
}

fn kernel(c: &Common) -> Result<HoppingKernel, CliError> {
    if c.kernel == "adjacency" {
        return Ok(HoppingKernel::adjacency(c.dim));
    }
    Ok(HoppingKernel::from_json(&json_arg(&c.kernel)?, c.dim)?)
}

fn params(c: &Common) -> Result<ExperimentParams, CliError> {
    let mut p = ExperimentParams::new(c.dim, 20, distribution(c)?);
    p.kernel = kernel(c)?;
    if !c.sizes.is_empty() {
        p.sizes = c.sizes.clone();
    }
    if let Some(g) = &c.grid {
        let parts: Vec<&str> = g.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(usage(format!(
                "--grid must look like lo:hi:steps, got '{g}'"
            )));
        };
        let steps: usize = steps
            .parse()
            .map_err(|_| usage(format!("bad grid step count '{steps}'")))?;
        p.grid = linspace(parse_f64(lo, "grid")?, parse_f64(hi, "grid")?, steps);
    }
    p.realizations = c.realizations;
    p.seed = c.seed;
    p.restriction = c.restriction.parse::<Restriction>()?;
    p.collar = c.collar;
    p.workers = c.workers;
    p.validate()?;
    Ok(p)
}

fn energies(c: &Common) -> Result<Vec<EnergyPoint>, CliError> {
    if c.energies.is_empty() {
        return Err(usage("at least one --E is required"));
    }
    Ok(c.energies
        .iter()
        .map(|e| e.parse::<EnergyPoint>())
        .collect::<qperc_core::Result<_>>()?)
}

fn windows(c: &Common) -> Result<Vec<f64>, CliError> {
    match &c.windows {
        Some(w) => parse_list(w, "window"),
        None => Ok(DEFAULTS.windows.to_vec()),
    }
}

/// Catalog of cluster energies for laws made only of atoms.
fn matching_catalog(
    p: &ExperimentParams,
    max_size: usize,
) -> Result<Option<FiniteSpectrumCatalog>, CliError> {
    if max_size == 0 || !p.dist.pieces().is_empty() || p.dist.atoms().is_empty() {
        return Ok(None);
    }
    let atoms: Vec<f64> = p.dist.atoms().iter().map(|a| a.0).collect();
    let subgraphs = enumerate_connected_subgraphs(&p.kernel, max_size)?;
    Ok(Some(cluster_spectrum_catalog(
        &subgraphs, &p.kernel, &atoms,
    )?))
}

const IDS_HEADER: [&str; 6] = ["E", "mean", "stderr", "M", "L", "restriction"];
const JUMP_HEADER: [&str; 6] = ["E", "window", "jump", "stderr", "exact", "catalog_match"];

fn ids_rows(ids: &EmpiricalIDS) -> Vec<Vec<String>> {
    (0..ids.grid.len())
        .map(|k| {
            vec![
                num(ids.grid[k]),
                num(ids.mean[k]),
                num(ids.stderr[k]),
                ids.realizations.to_string(),
                ids.l.to_string(),
                ids.restriction.to_string(),
            ]
        })
        .collect()
}

fn jump_rows(jumps: &[JumpEstimate]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for j in jumps {
        for (k, w) in j.windows.iter().enumerate() {
            rows.push(vec![
                num(j.energy),
                num(*w),
                num(j.jump[k]),
                num(j.stderr[k]),
                opt(j.exact.map(|x| x.mean)),
                opt(j.catalog_match.map(|m| m.energy)),
            ]);
        }
    }
    rows
}

#[derive(Deserialize)]
struct MirrorInput {
    sites: Vec<Vec<i32>>,
    potential: Vec<f64>,
    #[serde(default)]
    boundary: Vec<(Vec<i32>, f64)>,
    f: Vec<f64>,
    energy: f64,
    #[serde(default)]
    filler: f64,
}

#[derive(Serialize)]
struct CatalogRow {
    energy: f64,
    multiplicity: usize,
    witness: Vec<Vec<i32>>,
    potential: Vec<f64>,
}

/// Runs `command` and writes its outputs and manifest.
pub(crate) fn execute(command: Command, args: Vec<String>) -> Result<(), CliError> {
    if let Command::Replay {
        manifest,
        out,
        workers,
    } = command
    {
        return replay(&manifest, &out, workers);
    }
    let started = now();
    let name = command.name();
    let common = command
        .common()
        .expect("experiment commands carry common flags")
        .clone();
    let mut out = Output::new(&common.out, common.format)?;
    let (params_json, summary): (Value, Value) = match command {
        Command::Ids { estimator, .. } => {
            let p = params(&common)?;
            let est: Estimator = estimator.parse()?;
            let ids = estimate_ids(&p, est)?;
            out.table("ids", &IDS_HEADER, &ids_rows(&ids), &ids)?;
            (
                json!({ "experiment": p, "estimator": est }),
                json!({ "active_fraction": ids.active_fraction }),
            )
        }
        Command::Jumps { max_size, .. } => {
            let p = params(&common)?;
            let es = energies(&common)?;
            let ws = windows(&common)?;
            let catalog = matching_catalog(&p, max_size)?;
            let jumps = ids_jumps(&p, &es, &ws, catalog.as_ref())?;
            out.table("jumps", &JUMP_HEADER, &jump_rows(&jumps), &jumps)?;
            (
                json!({ "experiment": p, "energies": es, "windows": ws, "catalog_max_size": max_size }),
                json!({ "catalog_size": catalog.as_ref().map(|c| c.len()) }),
            )
        }
        Command::Gn { nmax, .. } => {
            let p = params(&common)?;
            let prof = cluster_density_profile(&p, nmax)?;
            let mut rows: Vec<Vec<String>> = prof
                .g
                .iter()
                .enumerate()
                .map(|(k, g)| vec![(k + 1).to_string(), num(g.mean), num(g.stderr)])
                .collect();
            rows.push(vec![
                "inf".into(),
                num(prof.g_inf.mean),
                num(prof.g_inf.stderr),
            ]);
            out.table("gn", &["n", "G", "stderr"], &rows, &prof)?;
            (
                json!({ "experiment": p, "nmax": nmax }),
                json!({ "g_inf": prof.g_inf }),
            )
        }
        Command::Wegner {
            a, b, intervals, ..
        } => {
            let p = params(&common)?;
            let ivs = intervals
                .iter()
                .map(|s| parse_pair(s, "interval"))
                .collect::<Result<Vec<_>, _>>()?;
            let reports = wegner_experiment(&p, &ivs, a, b)?;
            let rows = reports
                .iter()
                .map(|r| {
                    vec![
                        num(r.constant.lo),
                        num(r.constant.hi),
                        num(r.constant.delta),
                        num(r.constant.constant),
                        num(r.lhs.mean),
                        num(r.ratio),
                    ]
                })
                .collect::<Vec<_>>();
            out.table(
                "wegner",
                &["lo", "hi", "delta", "C", "lhs", "ratio"],
                &rows,
                &reports,
            )?;
            let holds = reports.iter().all(|r| r.holds());
            (
                json!({ "experiment": p, "a": a, "b": b, "intervals": ivs }),
                json!({ "all_hold": holds }),
            )
        }
        Command::Loghoelder {
            minpoly,
            denom,
            approx,
            ..
        } => {
            let p = params(&common)?;
            let e = match (&minpoly, common.energies.as_slice()) {
                (Some(m), _) => {
                    let coeffs = m
                        .split(',')
                        .map(|c| c.trim().parse::<i64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| usage(format!("bad --minpoly '{m}'")))?;
                    AlgebraicNumber::new(coeffs, denom, approx)?
                }
                (None, [one]) => {
                    let point: EnergyPoint = one.parse()?;
                    let (r, s) = point.rational.ok_or_else(|| {
                        usage("--E must be rational here; use --minpoly otherwise")
                    })?;
                    AlgebraicNumber::rational(r, s)?
                }
                _ => return Err(usage("give --minpoly or a single rational --E")),
            };
            let eps = match &common.eps {
                Some(s) => parse_list(s, "eps")?,
                None => DEFAULTS.eps.to_vec(),
            };
            let rep = log_hoelder_check(&p, &e, &eps)?;
            let rows = rep
                .rows
                .iter()
                .map(|r| vec![num(rep.energy), num(r.eps), num(r.lhs_max), num(r.bound)])
                .collect::<Vec<_>>();
            out.table("loghoelder", &["E", "eps", "lhs_max", "bound"], &rows, &rep)?;
            (
                json!({ "experiment": p, "minpoly": e.minpoly(), "denom": e.denom(), "eps": eps }),
                json!({ "c_e": rep.c_e, "norm": rep.norm, "holds": rep.holds() }),
            )
        }
        Command::Continuity { .. } => {
            let p = params(&common)?;
            let es: Vec<f64> = energies(&common)?.iter().map(|e| e.value).collect();
            let ws = windows(&common)?;
            let jumps = continuity_probe(&p, &es, &ws)?;
            out.table("continuity", &JUMP_HEADER, &jump_rows(&jumps), &jumps)?;
            let max: Vec<f64> = jumps.iter().map(JumpEstimate::max_jump).collect();
            (
                json!({ "experiment": p, "energies": es, "windows": ws }),
                json!({ "max_jump": max }),
            )
        }
        Command::Convergence { .. } => {
            let p = params(&common)?;
            let rep = convergence_study(&p)?;
            let rows: Vec<Vec<String>> = rep
                .box_ids
                .iter()
                .zip(&rep.con_ids)
                .flat_map(|(b, c)| ids_rows(b).into_iter().chain(ids_rows(c)))
                .collect();
            out.table("convergence", &IDS_HEADER, &rows, &rep)?;
            if common.format == crate::Format::Csv {
                let summary: Vec<Vec<String>> = (0..rep.sizes.len())
                    .map(|k| {
                        vec![
                            rep.sizes[k].to_string(),
                            num(rep.box_con[k]),
                            opt(rep.cauchy_box.get(k).copied()),
                            opt(rep.cauchy_con.get(k).copied()),
                        ]
                    })
                    .collect();
                out.table(
                    "convergence_summary",
                    &["L", "box_con", "cauchy_box", "cauchy_con"],
                    &summary,
                    &(),
                )?;
            }
            (
                json!({ "experiment": p }),
                json!({ "cauchy_box": rep.cauchy_box, "cauchy_con": rep.cauchy_con, "box_con": rep.box_con }),
            )
        }
        Command::Catalog {
            max_size, atoms, ..
        } => {
            let k = kernel(&common)?;
            let values = match (&atoms, &common.dist, common.p) {
                (Some(a), _, _) => parse_list(a, "atom")?,
                (None, None, None) => vec![0.0],
                _ => {
                    let d = distribution(&common)?;
                    d.atoms().iter().map(|a| a.0).collect()
                }
            };
            let subgraphs = enumerate_connected_subgraphs(&k, max_size)?;
            let cat = cluster_spectrum_catalog(&subgraphs, &k, &values)?;
            match common.format {
                crate::Format::Csv => out.raw("catalog.csv", |f| Ok(cat.write_csv(f)?))?,
                crate::Format::Json => {
                    let rows: Vec<CatalogRow> = cat
                        .entries()
                        .iter()
                        .map(|e| CatalogRow {
                            energy: e.energy,
                            multiplicity: e.multiplicity,
                            witness: e.witness.to_vecs(),
                            potential: e.potential.clone(),
                        })
                        .collect();
                    out.json("catalog.json", &rows)?
                }
            }
            (
                json!({ "dim": common.dim, "kernel": k, "max_size": max_size, "atoms": values }),
                json!({ "energies": cat.len(), "min_gap": cat.min_gap() }),
            )
        }
        Command::Mirror { input, .. } => {
            let k = kernel(&common)?;
            let text = fs::read_to_string(&input).map_err(|e| io_err(&input, e))?;
            let m: MirrorInput =
                serde_json::from_str(&text).map_err(|e| usage(format!("mirror input: {e}")))?;
            let s = SiteSet::new(common.dim, m.sites.clone())?;
            // the input lists values in its own site order; the embedding wants set order
            let order: Vec<usize> = s
                .iter()
                .map(|x| {
                    m.sites
                        .iter()
                        .position(|y| y.as_slice() == x)
                        .expect("site from input")
                })
                .collect();
            if m.potential.len() != m.sites.len() || m.f.len() != m.sites.len() {
                return Err(usage("potential and f need one value per site"));
            }
            let q: Vec<f64> = order.iter().map(|&i| m.potential[i]).collect();
            let f: Vec<f64> = order.iter().map(|&i| m.f[i]).collect();
            let emb = mirror_embed(&k, &s, &q, &m.boundary, &f, m.energy, m.filler)?;
            let rows: Vec<Vec<String>> = emb
                .matrix
                .sites()
                .iter()
                .zip(&emb.g)
                .map(|(x, g)| {
                    let site: Vec<String> = x.iter().map(i32::to_string).collect();
                    vec![
                        site.join(" "),
                        num(emb.config.value(x).unwrap_or(f64::NAN)),
                        num(*g),
                    ]
                })
                .collect();
            let value = json!({ "axis": emb.axis, "residual": emb.residual, "g": emb.g, "sites": emb.matrix.sites().to_vecs() });
            out.table("mirror", &["site", "potential", "g"], &rows, &value)?;
            (
                json!({ "dim": common.dim, "kernel": k, "input": input }),
                json!({ "axis": emb.axis, "residual": emb.residual }),
            )
        }
        Command::Replay { .. } => unreachable!("handled above"),
    };
    let manifest = Manifest {
        command: name.to_string(),
        args,
        params: params_json,
        defaults: serde_json::to_value(DEFAULTS).expect("defaults serialize"),
        seed: Some(common.seed),
        started_unix: started,
        finished_unix: now(),
        outputs: out.files.clone(),
        summary,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    out.manifest(&manifest)
}

fn replay(path: &Path, out: &Path, workers: Option<usize>) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| usage(format!("manifest: {e}")))?;
    if manifest.command == "replay" {
        return Err(usage("a replay manifest cannot be replayed"));
    }
    let mut argv = vec!["qperc".to_string()];
    argv.extend(manifest.args.iter().cloned());
    argv.push("--out".into());
    argv.push(out.to_string_lossy().into_owned());
    if let Some(w) = workers {
        argv.push("--workers".into());
        argv.push(w.to_string());
    }
    let cli = <Cli as clap::Parser>::try_parse_from(&argv).map_err(|e| {
        usage(format!(
            "manifest arguments: {}",
            e.to_string().lines().next().unwrap_or("")
        ))
    })?;
    execute(cli.command, argv[1..].to_vec())
}
