use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::controller::{controller_step, ControllerParams};
use super::track::{Track, TrackConfig};
use super::weights::WeightMapping;
use super::Problem;
use crate::{BoxBounds, Evaluation, ObjectiveVector, ParameterVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub delta: f64,
}

/// Closed-loop simulation settings for the surrogate vehicle benchmark.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleConfig {
    pub track: TrackConfig,
    pub controller: ControllerParams,
    /// Simulation wall-clock cap in seconds.
    pub t_max: f64,
    /// RK4 substeps per controller sampling interval.
    pub substeps: usize,
    /// Lateral offset beyond which the run is aborted early as hopeless.
    pub abort_elat: f64,
    /// Frozen hypervolume reference point (componentwise worst successful
    /// objectives of a 200-evaluation random pilot, padded by 10 percent).
    pub reference_point: Vec<f64>,
    /// Typical steps of one evaluation, from the same pilot.
    pub mean_steps_per_eval: u64,
    /// Reference-clock cost of one simulation step in seconds, calibrated
    /// once so that budget accounting is machine-independent.
    pub nominal_seconds_per_step: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            track: TrackConfig::default(),
            controller: ControllerParams::default(),
            t_max: 120.0,
            substeps: 2,
            abort_elat: 5.0,
            reference_point: vec![2.49, 0.97, 2.83],
            mean_steps_per_eval: 620,
            nominal_seconds_per_step: 2.0e-5,
        }
    }
}

/// Per-sample closed-loop traces of one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
    pub v: Vec<f64>,
    pub delta: Vec<f64>,
    pub v_des: Vec<f64>,
    pub e_lat: Vec<f64>,
    pub a_lat: Vec<f64>,
    pub a_long: Vec<f64>,
    pub n_laps: u32,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Columnar text export, one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y,psi,v,delta,v_des,e_lat,a_lat,a_long")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                self.t[k],
                self.x[k],
                self.y[k],
                self.psi[k],
                self.v[k],
                self.delta[k],
                self.v_des[k],
                self.e_lat[k],
                self.a_lat[k],
                self.a_long[k]
            )?;
        }
        Ok(())
    }
}

/// How a simulation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimOutcome {
    CompletedLap,
    LateralBoundExceeded,
    Timeout,
    NumericalBlowup,
    ControllerFailure,
}

/// Root-mean-square speed tracking error.
pub fn objective_j1(log: &TrajectoryLog) -> f64 {
    rms(log.v_des.iter().zip(&log.v).map(|(d, v)| d - v))
}

/// Root-mean-square lateral deviation.
pub fn objective_j2(log: &TrajectoryLog) -> f64 {
    rms(log.e_lat.iter().copied())
}

/// Root-mean-square total acceleration `sqrt(a_lat^2 + a_long^2)`.
pub fn objective_j3(log: &TrajectoryLog) -> f64 {
    rms(log
        .a_lat
        .iter()
        .zip(&log.a_long)
        .map(|(lat, long)| (lat * lat + long * long).sqrt()))
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v * v;
        n += 1;
    }
    assert!(n > 0, "empty trajectory");
    (sum / n as f64).sqrt()
}

/// The crash indicator: the lap was completed and the lateral deviation
/// never exceeded 1.5 m.
pub fn crash_predicate(log: &TrajectoryLog) -> bool {
    let e_max = log.e_lat.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    e_max <= 1.5 && log.n_laps == 1
}

/// Runs the kinematic-bicycle closed loop for one parameterization.
/// Deterministic and bit-reproducible in `theta`.
pub fn simulate_vehicle(
    weights: &WeightMapping,
    cfg: &VehicleConfig,
    track: &Track,
) -> (TrajectoryLog, SimOutcome) {
    let params = &cfg.controller;
    let ts = params.ts;
    let max_steps = (cfg.t_max / ts).round() as usize;
    let start = track.sample(0.0);
    let mut state = VehicleState {
        x: start.position[0],
        y: start.position[1],
        psi: start.heading,
        v: start.v_lim,
        delta: 0.0,
    };
    let mut log = TrajectoryLog::default();
    let mut progress = 0.0f64;
    let mut s_prev = 0.0f64;
    let mut outcome = SimOutcome::Timeout;

    for k in 0..max_steps {
        let proj = track.project([state.x, state.y]);
        let ds = wrap_half(proj.s - s_prev, track.lap_length());
        progress += ds;
        s_prev = proj.s;

        let cmd = match controller_step(&state, track, weights, params, proj.s) {
            Some(cmd) => cmd,
            None => {
                outcome = SimOutcome::ControllerFailure;
                break;
            }
        };

        // log the sample at t_k with the input applied over [t_k, t_k + ts)
        log.t.push(k as f64 * ts);
        log.x.push(state.x);
        log.y.push(state.y);
        log.psi.push(state.psi);
        log.v.push(state.v);
        log.delta.push(state.delta);
        log.v_des.push(track.v_lim(proj.s));
        log.e_lat.push(proj.e_lat);
        log.a_lat
            .push(state.v * state.v * state.delta.tan() / params.wheelbase);
        log.a_long.push(cmd.accel);

        state = integrate(&state, cmd.accel, cmd.steer_rate, ts, cfg.substeps, params);

        if !(state.x.is_finite()
            && state.y.is_finite()
            && state.psi.is_finite()
            && state.v.is_finite()
            && state.delta.is_finite())
        {
            outcome = SimOutcome::NumericalBlowup;
            log::debug!("vehicle state blew up at step {k}");
            break;
        }
        if proj.e_lat.abs() > cfg.abort_elat {
            outcome = SimOutcome::LateralBoundExceeded;
            break;
        }
        if progress >= track.lap_length() {
            log.n_laps = 1;
            outcome = SimOutcome::CompletedLap;
            break;
        }
    }
    (log, outcome)
}

fn wrap_half(ds: f64, lap: f64) -> f64 {
    let mut d = ds % lap;
    if d > lap / 2.0 {
        d -= lap;
    } else if d < -lap / 2.0 {
        d += lap;
    }
    d
}

fn integrate(
    state: &VehicleState,
    accel: f64,
    steer_rate: f64,
    ts: f64,
    substeps: usize,
    params: &ControllerParams,
) -> VehicleState {
    let mut z = [state.x, state.y, state.psi, state.v, state.delta];
    let h = ts / substeps as f64;
    let lw = params.wheelbase;
    let deriv = |z: &[f64; 5]| {
        [
            z[3] * z[2].cos(),
            z[3] * z[2].sin(),
            z[3] * z[4].tan() / lw,
            accel,
            steer_rate,
        ]
    };
    for _ in 0..substeps {
        let k1 = deriv(&z);
        let z2 = add_scaled(&z, &k1, h / 2.0);
        let k2 = deriv(&z2);
        let z3 = add_scaled(&z, &k2, h / 2.0);
        let k3 = deriv(&z3);
        let z4 = add_scaled(&z, &k3, h);
        let k4 = deriv(&z4);
        for i in 0..5 {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        z[3] = z[3].max(0.0);
        z[4] = z[4].clamp(-params.delta_max, params.delta_max);
    }
    VehicleState {
        x: z[0],
        y: z[1],
        psi: z[2],
        v: z[3],
        delta: z[4],
    }
}

fn add_scaled(z: &[f64; 5], k: &[f64; 5], h: f64) -> [f64; 5] {
    [
        z[0] + h * k[0],
        z[1] + h * k[1],
        z[2] + h * k[2],
        z[3] + h * k[3],
        z[4] + h * k[4],
    ]
}

/// The surrogate vehicle-guidance tuning problem: five weight exponents on
/// `[-3, 4]`, three objectives, binary crash signal.
pub struct VehicleProblem {
    cfg: VehicleConfig,
    track: Track,
    bounds: BoxBounds,
    reference: ObjectiveVector,
}

impl VehicleProblem {
    pub fn new(cfg: VehicleConfig) -> Self {
        let track = Track::build(&cfg.track);
        let reference = ObjectiveVector::new(cfg.reference_point.clone()).unwrap();
        Self {
            cfg,
            track,
            bounds: BoxBounds::uniform(5, -3.0, 4.0).unwrap(),
            reference,
        }
    }

    pub fn config(&self) -> &VehicleConfig {
        &self.cfg
    }

    pub fn track(&self) -> &Track {
        &self.track
    }

    /// Full simulation output for a parameter vector, for trajectory export
    /// and audits.
    pub fn simulate(&self, theta: &ParameterVector) -> (TrajectoryLog, SimOutcome) {
        let weights = WeightMapping::from_theta(theta.values());
        simulate_vehicle(&weights, &self.cfg, &self.track)
    }
}

impl Problem for VehicleProblem {
    fn name(&self) -> &str {
        "vehicle"
    }

    fn n_params(&self) -> usize {
        5
    }

    fn n_objectives(&self) -> usize {
        3
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn reference_point(&self) -> &ObjectiveVector {
        &self.reference
    }

    fn evaluate(&self, theta: &ParameterVector) -> Evaluation {
        let started = Instant::now();
        let (log, outcome) = self.simulate(theta);
        let wall_time = started.elapsed().as_secs_f64();
        let steps = log.len() as u64;
        let ok = outcome == SimOutcome::CompletedLap && crash_predicate(&log);
        if ok {
            let objectives = ObjectiveVector::new(vec![
                objective_j1(&log),
                objective_j2(&log),
                objective_j3(&log),
            ])
            .unwrap();
            Evaluation::success(theta.clone(), objectives, steps, wall_time)
        } else {
            Evaluation::crashed(theta.clone(), steps, wall_time)
        }
    }

    fn mean_steps_per_eval(&self) -> u64 {
        self.cfg.mean_steps_per_eval
    }

    fn nominal_seconds_per_step(&self) -> f64 {
        self.cfg.nominal_seconds_per_step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> VehicleProblem {
        VehicleProblem::new(VehicleConfig::default())
    }

    fn theta(p: &VehicleProblem, values: [f64; 5]) -> ParameterVector {
        ParameterVector::new(values.to_vec(), p.bounds()).unwrap()
    }

    #[test]
    fn objective_fixtures() {
        let mut log = TrajectoryLog::default();
        log.v_des = vec![10.0, 10.0];
        log.v = vec![7.0, 6.0];
        log.e_lat = vec![0.3, -0.4];
        log.a_lat = vec![3.0, 3.0];
        log.a_long = vec![4.0, 4.0];
        assert!((objective_j1(&log) - (25.0f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!((objective_j2(&log) - (0.25f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!((objective_j3(&log) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn objective_trivial_cases() {
        let mut log = TrajectoryLog::default();
        log.v_des = vec![10.0, 10.0, 10.0];
        log.v = vec![10.0, 10.0, 10.0];
        log.e_lat = vec![0.0, 0.0, 0.0];
        log.a_lat = vec![0.0, 0.0, 0.0];
        log.a_long = vec![0.0, 0.0, 0.0];
        assert_eq!(objective_j1(&log), 0.0);
        assert_eq!(objective_j2(&log), 0.0);
        assert_eq!(objective_j3(&log), 0.0);

        log.v = vec![9.0, 9.0, 9.0];
        log.e_lat = vec![0.2, 0.2, 0.2];
        assert!((objective_j1(&log) - 1.0).abs() < 1e-12);
        assert!((objective_j2(&log) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn objective_j3_mixed_hand_sequence() {
        let mut log = TrajectoryLog::default();
        log.a_lat = vec![1.0, 2.0, 2.0];
        log.a_long = vec![2.0, 2.0, 1.0];
        // a = (sqrt 5, sqrt 8, sqrt 5), RMS = sqrt(18 / 3) = sqrt 6
        assert!((objective_j3(&log) - 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn crash_predicate_boundary_cases() {
        let mut log = TrajectoryLog::default();
        log.e_lat = vec![0.0, 1.2, -0.8];
        log.n_laps = 1;
        assert!(crash_predicate(&log));

        log.e_lat = vec![0.0, 1.6, -0.8];
        assert!(!crash_predicate(&log));

        log.e_lat = vec![0.1, 0.1];
        log.n_laps = 0;
        assert!(!crash_predicate(&log));

        // exactly at the bound counts as ok
        log.e_lat = vec![1.5, -1.5];
        log.n_laps = 1;
        assert!(crash_predicate(&log));
    }

    #[test]
    fn neutral_weights_complete_a_lap() {
        let p = problem();
        let ev = p.evaluate(&theta(&p, [0.0; 5]));
        assert!(ev.crash_ok(), "neutral weights should finish the lap");
        let obj = ev.objectives.unwrap();
        assert!(obj.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn hostile_weights_crash() {
        let p = problem();
        // huge acceleration penalty with negligible speed tracking reward:
        // the vehicle cannot keep pace and times out
        let ev = p.evaluate(&theta(&p, [0.0, 0.0, 4.0, 0.0, -3.0]));
        assert!(!ev.crash_ok());
    }

    #[test]
    fn simulation_is_bit_reproducible() {
        let p = problem();
        let t = theta(&p, [0.5, -1.0, 0.3, 1.0, 0.7]);
        let (log_a, out_a) = p.simulate(&t);
        let (log_b, out_b) = p.simulate(&t);
        assert_eq!(out_a, out_b);
        assert_eq!(log_a, log_b);
    }

    #[test]
    fn successful_runs_respect_lateral_bound_in_j2() {
        let p = problem();
        let ev = p.evaluate(&theta(&p, [0.0; 5]));
        let (log, _) = p.simulate(&theta(&p, [0.0; 5]));
        if ev.crash_ok() {
            let j2 = ev.objectives.unwrap().values()[1];
            assert!(j2 <= 1.5);
            let e_max = log.e_lat.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            assert!(e_max <= 1.5);
        }
    }

    #[test]
    fn doubling_substeps_barely_changes_objectives() {
        let base = problem();
        let mut cfg = VehicleConfig::default();
        cfg.substeps *= 2;
        let fine = VehicleProblem::new(cfg);
        let t = theta(&base, [0.0; 5]);
        let (log_a, _) = base.simulate(&t);
        let (log_b, _) = fine.simulate(&t);
        for (ja, jb) in [
            (objective_j1(&log_a), objective_j1(&log_b)),
            (objective_j2(&log_a), objective_j2(&log_b)),
            (objective_j3(&log_a), objective_j3(&log_b)),
        ] {
            let rel = (ja - jb).abs() / ja.abs().max(1e-9);
            assert!(rel < 0.01, "{ja} vs {jb}");
        }
    }

    #[test]
    fn trajectory_csv_row_count() {
        let p = problem();
        let (log, _) = p.simulate(&theta(&p, [0.0; 5]));
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), log.len() + 1);
    }
}
