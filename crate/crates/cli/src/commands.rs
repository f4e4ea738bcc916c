use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mismatch_bounds::constellation::Modulation;
use mismatch_bounds::converse::{normal_approximation, NormalApproxQuery};
use mismatch_bounds::frame::{ebn0_to_sigma2, FrameConfig};
use mismatch_bounds::ldpc::{
    girth, min_snr_ldpc, peg_construct, puncture_mask, read_alist, simulate_bler, write_alist, CodeSidecar,
    LdpcCode, LdpcSnrSearch, PegConfig, SimConfig, SimRecord,
};
use mismatch_bounds::par::Exec;
use mismatch_bounds::tradeoff::{frame_bound, perfect_csi_bound, preamble_sweep, BoundKind, SweepEntry};

use crate::output::{decibels, probability, Table};
use crate::spec::RunSpec;

/// Rows that could not be computed; reported on standard error.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
}

impl Outcome {
    fn merge(&mut self, other: Outcome) {
        self.failures.extend(other.failures);
    }
}

fn bound_curve(spec: &RunSpec, kind: BoundKind, header: &[&str], normal: bool) -> Result<Outcome> {
    let settings = spec.settings(kind)?;
    let frame = spec.frame(None)?;
    let perfect = frame.with_preamble(0)?;
    let grid = spec.snr_grid()?;
    let rows = Exec::Parallel.map_slice(&grid, |&db| -> mismatch_bounds::Result<Vec<String>> {
        let matched = perfect_csi_bound(&perfect, db, &settings)?;
        let avg = frame_bound(&frame, db, &settings)?;
        let mut row = vec![decibels(db), probability(matched), probability(avg.value)];
        if kind == BoundKind::Grcb {
            row.push(probability(avg.std_error));
        }
        if normal {
            let sigma2 = ebn0_to_sigma2(db, frame.rate())?;
            let q = NormalApproxQuery { n: frame.total, rate: frame.rate(), snr: 1.0 / (2.0 * sigma2) };
            row.push(probability(normal_approximation(&q)));
        }
        Ok(row)
    });
    let mut header = header.to_vec();
    if normal {
        header.push("normal_approx");
    }
    let mut table = Table::create(spec.output.as_deref(), &header)?;
    let mut out = Outcome::default();
    for (db, row) in grid.iter().zip(rows) {
        match row {
            Ok(r) => table.row(r)?,
            Err(e) => out.failures.push(format!("ebn0_db = {db}: {e}")),
        }
    }
    table.finish()?;
    Ok(out)
}

pub fn grcb(spec: &RunSpec) -> Result<Outcome> {
    bound_curve(spec, BoundKind::Grcb, &["ebn0_db", "pb_matched", "pb_mismatched_avg", "stderr"], spec.normal_approx)
}

pub fn spb(spec: &RunSpec) -> Result<Outcome> {
    if spec.modulation() != Modulation::Bpsk {
        bail!("the sphere-packing bound is only available for BPSK");
    }
    bound_curve(spec, BoundKind::Spb, &["ebn0_db", "spb_matched", "spb_mismatched_avg"], false)
}

pub fn normal_approx(spec: &RunSpec) -> Result<Outcome> {
    let frame = spec.frame(None)?;
    let mut table = Table::create(spec.output.as_deref(), &["ebn0_db", "epsilon"])?;
    for db in spec.snr_grid()? {
        let sigma2 = ebn0_to_sigma2(db, frame.rate())?;
        let q = NormalApproxQuery { n: frame.total, rate: frame.rate(), snr: 1.0 / (2.0 * sigma2) };
        table.row([decibels(db), probability(normal_approximation(&q))])?;
    }
    table.finish()?;
    Ok(Outcome::default())
}

pub fn tradeoff(spec: &RunSpec) -> Result<Outcome> {
    let template = spec.frame(Some(0))?;
    let mut table = Table::create(spec.output.as_deref(), &["m", "target_pb", "bound_kind", "ebn0_star_db", "stderr_db"])?;
    let mut out = Outcome::default();
    let m_list = spec.m_list();
    for kind in spec.bound_kinds()? {
        let settings = spec.settings(kind)?;
        for entry in preamble_sweep(&template, &settings, spec.target_pb(), &m_list, spec.bracket()) {
            match entry {
                SweepEntry::Point(p) => table.row([
                    p.m.to_string(),
                    probability(p.target_pb),
                    p.bound_kind.to_string(),
                    decibels(p.ebn0_star_db),
                    decibels(p.stderr_db),
                ])?,
                SweepEntry::Skipped { m, reason } => {
                    if template.with_preamble(m).is_err() {
                        eprintln!("warning: skipping m = {m}: {reason}");
                    } else {
                        out.failures.push(format!("{kind} m = {m}: {reason}"));
                    }
                }
            }
        }
    }
    table.finish()?;
    Ok(out)
}

fn sidecar_path(alist: &Path) -> PathBuf {
    let mut s = alist.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn load_or_build_code(spec: &RunSpec, frame: &FrameConfig) -> Result<LdpcCode> {
    let k = frame.info_bits;
    let n = frame.total;
    let code = match &spec.code_in {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let h = read_alist(&text)?;
            let side = sidecar_path(path);
            let seed = match std::fs::read_to_string(&side) {
                Ok(s) => CodeSidecar::from_json(&s)?.seed,
                Err(_) => spec.seed(),
            };
            LdpcCode::new(h, k, seed)?
        }
        None => peg_construct(&PegConfig { n_code: n, n_checks: n - k, ..PegConfig::ira_512_256(spec.seed()) })?,
    };
    if code.n_code() != n || code.k_info() != k {
        bail!("code is ({}, {}), the frame needs ({n}, {k})", code.n_code(), code.k_info());
    }
    Ok(code)
}

pub fn ldpc(spec: &RunSpec) -> Result<Outcome> {
    if spec.modulation() != Modulation::Bpsk {
        bail!("LDPC link simulation is BPSK only");
    }
    let template = spec.frame(Some(0))?;
    let code = load_or_build_code(spec, &template)?;
    let m_list = spec.m_list();
    if let Some(path) = &spec.code_out {
        std::fs::write(path, write_alist(code.parity_check())).with_context(|| format!("writing {}", path.display()))?;
        let punctures = m_list
            .iter()
            .filter_map(|&m| puncture_mask(code.n_code(), code.k_info(), m).ok())
            .collect();
        let side = CodeSidecar {
            seed: code.seed,
            n_code: code.n_code(),
            k_info: code.k_info(),
            girth: girth(code.parity_check()),
            punctures,
        };
        std::fs::write(sidecar_path(path), side.to_json())?;
    }
    let mut table = Table::create(spec.output.as_deref(), &["m", "ebn0_db", "frames", "block_errors", "bler", "stderr"])?;
    let mut out = Outcome::default();
    let base = SimConfig {
        max_frames: spec.samples.map_or(1_000_000, |s| s as u64),
        target_errors: spec.target_errors.unwrap_or(100),
        ..SimConfig::new(0.0, spec.seed())
    };
    let write = |table: &mut Table, r: &SimRecord| {
        table.row([
            r.m.to_string(),
            decibels(r.ebn0_db),
            r.frames.to_string(),
            r.block_errors.to_string(),
            probability(r.bler),
            probability(r.stderr),
        ])
    };
    for &m in &m_list {
        let (frame, mask) = match (template.with_preamble(m), puncture_mask(code.n_code(), code.k_info(), m)) {
            (Ok(f), Ok(mask)) => (f, mask),
            (Err(e), _) | (_, Err(e)) => {
                eprintln!("warning: skipping m = {m}: {e}");
                continue;
            }
        };
        if spec.search {
            let search = LdpcSnrSearch {
                step_db: spec.snr_step.unwrap_or(0.25),
                ..LdpcSnrSearch::new(spec.snr_start.unwrap_or(2.5), spec.target_pb())
            };
            match min_snr_ldpc(&frame, &code, &mask, &search, &base) {
                Ok((star, records)) => {
                    for r in &records {
                        write(&mut table, r)?;
                    }
                    eprintln!("m = {m}: ebn0_star_db = {star:.3}");
                }
                Err(e) => out.failures.push(format!("m = {m}: {e}")),
            }
        } else {
            for db in spec.snr_grid()? {
                match simulate_bler(&frame, &code, &mask, &SimConfig { ebn0_db: db, ..base }) {
                    Ok(r) => write(&mut table, &r)?,
                    Err(e) => out.failures.push(format!("m = {m}, ebn0_db = {db}: {e}")),
                }
            }
        }
    }
    table.finish()?;
    Ok(out)
}

/// Pinned configurations of the published figures; files are written to
/// `dir`.
pub fn reproduce_figure(figure: u8, dir: &Path, with_ldpc: bool) -> Result<Outcome> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let at = |name: &str| Some(dir.join(name));
    let bpsk = RunSpec { modulation: Some(Modulation::Bpsk), total: Some(512), info_bits: Some(256), ..Default::default() };
    let qam = RunSpec { modulation: Some(Modulation::Qam16), total: Some(512), info_bits: Some(1024), ..Default::default() };
    let mut out = Outcome::default();
    match figure {
        2 => {
            let s = RunSpec { preamble: Some(16), snr_start: Some(0.0), snr_stop: Some(6.0), snr_step: Some(0.25), ..bpsk };
            out.merge(grcb(&RunSpec { output: at("fig2_grcb.csv"), ..s.clone() })?);
            out.merge(spb(&RunSpec { output: at("fig2_spb.csv"), ..s })?);
        }
        3 => {
            let s = RunSpec {
                bound: Some("both".into()),
                target_pb: Some(1e-3),
                m_list: Some(vec![8, 12, 16, 20, 24, 28, 32, 36, 40, 45, 48, 56, 64]),
                output: at("fig3_bounds.csv"),
                ..bpsk.clone()
            };
            out.merge(tradeoff(&s)?);
            if with_ldpc {
                let s = RunSpec {
                    m_list: Some(vec![8, 16, 24, 32, 48, 64]),
                    search: true,
                    snr_start: Some(2.5),
                    target_pb: Some(1e-3),
                    code_out: at("ira_512_256.alist"),
                    output: at("fig3_ldpc.csv"),
                    ..bpsk
                };
                out.merge(ldpc(&s)?);
            }
        }
        4 => {
            let s = RunSpec {
                preamble: Some(20),
                snr_start: Some(2.0),
                snr_stop: Some(7.0),
                snr_step: Some(0.25),
                normal_approx: true,
                output: at("fig4_grcb.csv"),
                ..qam
            };
            out.merge(grcb(&s)?);
        }
        5 => {
            let s = RunSpec {
                bound: Some("grcb".into()),
                target_pb: Some(1e-3),
                m_list: Some(vec![4, 8, 12, 16, 20, 24, 28, 32, 36, 40, 48]),
                output: at("fig5_tradeoff.csv"),
                ..qam
            };
            out.merge(tradeoff(&s)?);
        }
        other => bail!("no pinned configuration for figure {other} (choose 2, 3, 4 or 5)"),
    }
    Ok(out)
}
