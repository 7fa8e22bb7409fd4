//! Subcommand bodies. Each returns the report to write and its file name.

use std::fs::File;
use std::io::{BufWriter, Write};

use serde_json::{json, Value};

use corral::analysis::{average_probability, single_fidelity, BlochGrid};
use corral::disorder::{disorder_sweep, SweepConfig, SWEEP_SPIN};
use corral::experiments::{self, sigma_sweep};
use corral::io::{parse_plan, write_frame, write_frames_header, write_heatmap, PlanFile};
use corral::schedule::{multistation_plan, single_shot_plan};
use corral::{
    analytic_split_state, evolve, fft_evolve, gaussian_state, packet_center, BlochSpin, CompiledProtocol,
    CorralPlan, DisorderKind, DisorderVariant, Error, Homogeneous, InitialSpin, Lattice, Result, Sampling, Walker,
};

use crate::report::Report;
use crate::Flags;

/// Spin grid divisor for `--grid`: 11 × 41 = 451 states.
const FULL_GRID: u32 = 20;
/// Heatmap and frame rows at or below this probability are left out.
const FLOOR: f64 = 1e-12;
const DEFAULT_REALIZATIONS: usize = 100;
const DEFAULT_P_MAX: f64 = 0.001;
const DEFAULT_P_STEP: f64 = 0.0001;

pub fn run(name: &str, flags: &Flags) -> (Report, String) {
    let (file, plan) = match load(name, flags) {
        Ok(v) => v,
        Err(e) => {
            let mut r = Report::new(name, None, None);
            r.error = Some(e.to_string());
            return (r, "report.json".to_string());
        }
    };
    let report_name = file.output.report.clone();
    if name == "oracle-check" {
        let mut r = Report::new(name, None, None);
        match oracle_check(&plan, flags) {
            Ok(v) => r.fidelity = v,
            Err(e) => r.error = Some(e.to_string()),
        }
        return (r, report_name);
    }
    let protocol = match compile(name, &plan) {
        Ok(p) => p,
        Err(e) => {
            let mut r = Report::new(name, Some(&file), None);
            r.error = Some(e.to_string());
            return (r, report_name);
        }
    };
    let mut r = Report::new(name, Some(&file), Some(&protocol));
    let outcome = match name {
        "disorder-sweep" => sweep(&protocol, &file, flags, &mut r),
        "sigma-sweep" => sigma(&protocol, &plan, flags),
        "frames" => frames(&protocol, &plan, flags),
        _ => protocol_run(&protocol, &file, &plan, flags),
    };
    match outcome {
        Ok(v) => r.fidelity = v,
        Err(e) => r.error = Some(e.to_string()),
    }
    (r, report_name)
}

fn load(name: &str, flags: &Flags) -> Result<(PlanFile, CorralPlan)> {
    if let Some(path) = &flags.plan {
        return parse_plan(path);
    }
    let plan = match name {
        "corral" | "oracle-check" => experiments::corral_preset(),
        "multistation" | "disorder-sweep" => experiments::multistation_preset(),
        _ => experiments::herd_preset(),
    };
    Ok((PlanFile::from_plan(&plan), plan))
}

fn compile(name: &str, plan: &CorralPlan) -> Result<CompiledProtocol> {
    match name {
        "corral" => {
            if plan.stations.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::Plan("corral takes a single station".into()));
            }
            single_shot_plan(plan)
        }
        "herd" => single_shot_plan(plan),
        "multistation" => multistation_plan(plan),
        _ => experiments::compile(plan),
    }
}

fn single_spin(plan: &CorralPlan, fallback: BlochSpin) -> BlochSpin {
    match plan.spin {
        InitialSpin::Single(s) => s,
        InitialSpin::Grid { .. } => fallback,
    }
}

fn protocol_run(protocol: &CompiledProtocol, file: &PlanFile, plan: &CorralPlan, flags: &Flags) -> Result<Value> {
    let spin = if flags.grid {
        InitialSpin::Grid {
            step_divisor: FULL_GRID,
        }
    } else {
        plan.spin
    };

    // The packet must sit on the target center before its fidelity means anything.
    let probe = single_spin(plan, BlochSpin::PLUS_I);
    let psi0 = gaussian_state(protocol.gaussian, probe, protocol.lattice())?;
    let mut w = Walker::new(psi0, protocol.schedule.cursor())?;
    w.run_until(protocol.t_m)?;
    let center = packet_center(w.state());
    if (center - protocol.target_center as f64).abs() >= 1.0 {
        return Err(Error::Plan(format!(
            "packet center {center:.3} at t = {} is not within one site of the target {}",
            protocol.t_m, protocol.target_center
        )));
    }

    let f = experiments::evaluate(protocol, &spin)?;
    if let Some(stride) = flags.stride.or(file.output.heatmap_stride) {
        let frames = match spin {
            InitialSpin::Grid { step_divisor } => average_probability(
                &protocol.schedule,
                protocol.gaussian,
                &BlochGrid::new(step_divisor)?,
                protocol.t_m,
                stride,
            )?,
            InitialSpin::Single(s) => {
                let psi0 = gaussian_state(protocol.gaussian, s, protocol.lattice())?;
                evolve(psi0, protocol.schedule.cursor(), protocol.t_m, &Sampling::probabilities(stride))?
                    .trajectory
                    .probabilities
            }
        };
        let mut out = BufWriter::new(File::create(flags.out.join("heatmap.csv"))?);
        write_heatmap(&mut out, protocol.lattice(), &frames, FLOOR)?;
        out.flush()?;
    }
    if file.output.frames {
        write_frames(protocol, probe, protocol.t_m, flags)?;
    }
    Ok(json!({
        "t_m": f.t,
        "x": f.x,
        "n_states": f.values.len(),
        "mean_fidelity": f.mean,
        "std": f.std,
        "min": f.min,
        "max": f.max,
        "packet_center": center,
    }))
}

fn sweep(protocol: &CompiledProtocol, file: &PlanFile, flags: &Flags, r: &mut Report) -> Result<Value> {
    let p_values = SweepConfig::p_grid(
        flags.p_max.unwrap_or(DEFAULT_P_MAX),
        flags.p_step.unwrap_or(DEFAULT_P_STEP),
    )?;
    let (kinds, variants, tau, seed) = match &file.disorder {
        Some(d) => (vec![d.kind], vec![d.variant], d.tau, d.seed),
        None => (DisorderKind::ALL.to_vec(), vec![DisorderVariant::All], None, 0),
    };
    let config = SweepConfig {
        p_values,
        kinds,
        variants,
        realizations: flags.realizations.unwrap_or(DEFAULT_REALIZATIONS),
        master_seed: flags.seed.unwrap_or(seed),
        tau,
    };
    r.seeds.master_seed = Some(config.master_seed);
    r.seeds.realizations = Some(config.realizations);
    let clean = single_fidelity(&protocol.schedule, protocol.gaussian, SWEEP_SPIN, protocol.t_m, protocol.x)?;
    let report = disorder_sweep(protocol, &config)?;
    Ok(json!({
        "spin": SWEEP_SPIN,
        "clean_fidelity": clean,
        "sweep": report,
    }))
}

fn sigma(protocol: &CompiledProtocol, plan: &CorralPlan, _flags: &Flags) -> Result<Value> {
    let spin = single_spin(plan, BlochSpin::MINUS_I);
    let s: Vec<f64> = (1..=10).map(f64::from).collect();
    let points = sigma_sweep(protocol, &s, spin)?;
    Ok(json!({
        "t_m": protocol.t_m,
        "x": protocol.x,
        "spin": spin,
        "points": points,
    }))
}

fn frames(protocol: &CompiledProtocol, plan: &CorralPlan, flags: &Flags) -> Result<Value> {
    let spin = single_spin(plan, BlochSpin::PLUS_I);
    let until = flags.until.unwrap_or(protocol.t_m);
    let n = write_frames(protocol, spin, until, flags)?;
    let f = single_fidelity(&protocol.schedule, protocol.gaussian, spin, protocol.t_m, protocol.x)?;
    Ok(json!({
        "t_m": protocol.t_m,
        "x": protocol.x,
        "spin": spin,
        "frames": n,
        "until": until,
        "fidelity_at_t_m": f,
    }))
}

/// Writes `frames.csv` for `t = 0..=until` and returns the frame count.
fn write_frames(protocol: &CompiledProtocol, spin: BlochSpin, until: usize, flags: &Flags) -> Result<usize> {
    let schedule = protocol.schedule.clone().with_horizon(protocol.schedule.horizon().max(until));
    let psi0 = gaussian_state(protocol.gaussian, spin, schedule.lattice())?;
    let mut w = Walker::new(psi0, schedule.cursor())?;
    let mut out = BufWriter::new(File::create(flags.out.join("frames.csv"))?);
    write_frames_header(&mut out)?;
    write_frame(&mut out, 0, w.state(), FLOOR)?;
    while w.t() < until {
        w.advance()?;
        write_frame(&mut out, w.t(), w.state(), FLOOR)?;
    }
    out.flush()?;
    Ok(until + 1)
}

fn oracle_check(plan: &CorralPlan, flags: &Flags) -> Result<Value> {
    let t = flags.until.unwrap_or(200);
    let spin = single_spin(plan, BlochSpin::PLUS_I);
    let g = plan.gaussian;
    // The oracle needs the 1e-24 tails of the packet, about 10.5 s out, clear of the edge.
    let half = t as i64 + (14.0 * g.s).ceil() as i64 + 16;
    let lattice = Lattice::new(g.center - half, g.center + half)?;
    let psi0 = gaussian_state(g, spin, &lattice)?;
    let walked = evolve(psi0.clone(), Homogeneous::hadamard(lattice), t, &Sampling::none())?.state;
    let exact = fft_evolve(&psi0, t)?;
    let walk_vs_fft = walked.max_abs_diff(&exact)?;
    let first = t * 2 / 5;
    let semigroup = fft_evolve(&fft_evolve(&psi0, first)?, t - first)?.max_abs_diff(&exact)?;
    let split_overlap = analytic_split_state(g, spin, t, &lattice)?.inner(&exact)?.norm_sqr();
    Ok(json!({
        "t": t,
        "spin": spin,
        "walk_vs_fft": walk_vs_fft,
        "semigroup": semigroup,
        "split_overlap": split_overlap,
        "passed": walk_vs_fft < 1e-10 && semigroup < 1e-12,
    }))
}
