use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::track::Track;
use super::vehicle::VehicleState;
use super::weights::WeightMapping;

type Mat5 = SMatrix<f64, 5, 5>;
type Mat52 = SMatrix<f64, 5, 2>;
type Mat2 = SMatrix<f64, 2, 2>;
type Vec5 = SVector<f64, 5>;
type Vec2 = SVector<f64, 2>;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Receding horizon length in controller steps.
    pub horizon: usize,
    /// Controller and simulation sampling time.
    pub ts: f64,
    pub wheelbase: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub omega_max: f64,
    pub delta_max: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            horizon: 40,
            ts: 0.05,
            wheelbase: 2.7,
            a_min: -4.0,
            a_max: 3.0,
            omega_max: 0.5,
            delta_max: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub accel: f64,
    pub steer_rate: f64,
}

/// One receding-horizon step: linearize the kinematic bicycle along the
/// speed-limit reference, minimize the weighted quadratic tracking cost by a
/// backward Riccati recursion, and return the first input clipped to the
/// actuator bounds. `None` signals a numerically failed recursion; the
/// evaluation then counts as a crash.
pub fn controller_step(
    state: &VehicleState,
    track: &Track,
    weights: &WeightMapping,
    params: &ControllerParams,
    s0: f64,
) -> Option<ControlCommand> {
    let h = params.horizon;
    let ts = params.ts;
    let lw = params.wheelbase;

    // reference rollout along the centerline at the speed limit
    let mut s_ref = Vec::with_capacity(h + 2);
    let mut s = s0;
    for _ in 0..=h + 1 {
        s_ref.push(s);
        s += track.v_lim(s) * ts;
    }
    let mut x_r = Vec::with_capacity(h + 2);
    let mut psi_prev = state.psi;
    for (i, &si) in s_ref.iter().enumerate() {
        let p = track.sample(si);
        let psi = unwrap_angle(p.heading, psi_prev);
        psi_prev = psi;
        let delta_r = (lw * p.curvature).atan();
        x_r.push(RefPoint {
            x: p.position[0],
            y: p.position[1],
            psi,
            v: p.v_lim,
            delta: delta_r,
            _stage: i,
        });
    }

    let b_mat = {
        let mut b = Mat52::zeros();
        b[(3, 0)] = ts;
        b[(4, 1)] = ts;
        b
    };
    let r_mat = Mat2::from_diagonal(&Vec2::new(weights.r_a, weights.r_omega));

    // terminal cost: same weights as the stage cost
    let q_of = |v_ref: f64| {
        let c_lat = v_ref * v_ref / lw;
        Mat5::from_diagonal(&Vec5::new(
            weights.w_pos,
            weights.w_pos,
            weights.q_psi,
            weights.r_v,
            weights.w_alat * c_lat * c_lat,
        ))
    };
    let goal_of = |r: &RefPoint| Vec5::new(r.x, r.y, r.psi, r.v, 0.0);

    let mut s_cost = q_of(x_r[h].v);
    let mut b_cost: Vec5 = s_cost * goal_of(&x_r[h]);

    // backward pass down to the value function after the first input
    for i in (1..h).rev() {
        let (a_i, c_i) = linearize(&x_r[i], &x_r[i + 1], ts, lw, &b_mat);
        let step = riccati_step(&s_cost, &b_cost, &a_i, &b_mat, &c_i, &r_mat)?;
        let q_i = q_of(x_r[i].v);
        s_cost = q_i + step.s_tilde_a;
        b_cost = q_i * goal_of(&x_r[i]) + step.b_part;
        if !s_cost.iter().all(|v| v.is_finite()) || !b_cost.iter().all(|v| v.is_finite()) {
            return None;
        }
    }

    // first input from the value function at stage 1
    let (a_0, c_0) = linearize(&x_r[0], &x_r[1], ts, lw, &b_mat);
    let m = r_mat + b_mat.transpose() * s_cost * b_mat;
    let m_inv = m.try_inverse()?;
    let z0 = Vec5::new(state.x, state.y, state.psi, state.v, state.delta);
    let u = -m_inv * b_mat.transpose() * (s_cost * (a_0 * z0 + c_0) - b_cost);
    if !u.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(ControlCommand {
        accel: u[0].clamp(params.a_min, params.a_max),
        steer_rate: u[1].clamp(-params.omega_max, params.omega_max),
    })
}

struct RefPoint {
    x: f64,
    y: f64,
    psi: f64,
    v: f64,
    delta: f64,
    _stage: usize,
}

struct RiccatiStep {
    s_tilde_a: Mat5,
    b_part: Vec5,
}

fn riccati_step(
    s: &Mat5,
    b: &Vec5,
    a: &Mat5,
    b_in: &Mat52,
    c: &Vec5,
    r: &Mat2,
) -> Option<RiccatiStep> {
    let m = r + b_in.transpose() * s * b_in;
    let m_inv = m.try_inverse()?;
    let t = b_in * m_inv * b_in.transpose();
    let s_tilde = s - s * t * s;
    let b_hat = b - s * t * b;
    Some(RiccatiStep {
        s_tilde_a: a.transpose() * s_tilde * a,
        b_part: a.transpose() * (b_hat - s_tilde * c),
    })
}

/// Euler linearization of the kinematic bicycle about the reference point,
/// as `z' = A z + B u + c`.
fn linearize(r: &RefPoint, r_next: &RefPoint, ts: f64, lw: f64, b_mat: &Mat52) -> (Mat5, Vec5) {
    let (sin_psi, cos_psi) = r.psi.sin_cos();
    let tan_delta = r.delta.tan();
    let sec2 = 1.0 / (r.delta.cos() * r.delta.cos());
    let mut a = Mat5::identity();
    a[(0, 2)] = -ts * r.v * sin_psi;
    a[(0, 3)] = ts * cos_psi;
    a[(1, 2)] = ts * r.v * cos_psi;
    a[(1, 3)] = ts * sin_psi;
    a[(2, 3)] = ts * tan_delta / lw;
    a[(2, 4)] = ts * r.v * sec2 / lw;

    let u_ref = Vec2::new((r_next.v - r.v) / ts, (r_next.delta - r.delta) / ts);
    let z_ref = Vec5::new(r.x, r.y, r.psi, r.v, r.delta);
    let f_euler = Vec5::new(
        r.x + ts * r.v * cos_psi,
        r.y + ts * r.v * sin_psi,
        r.psi + ts * r.v * tan_delta / lw,
        r.v + ts * u_ref[0],
        r.delta + ts * u_ref[1],
    );
    let c = f_euler - a * z_ref - b_mat * u_ref;
    (a, c)
}

fn unwrap_angle(angle: f64, near: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle;
    while a - near > PI {
        a -= TAU;
    }
    while near - a > PI {
        a += TAU;
    }
    a
}
