//! Constant-state algebra for self-similar potential flow: the density and
//! sound-speed closures, Rankine-Hugoniot conditions, and the root solves
//! that pin down the reflection configurations (incident shock, reflected
//! state behind the wedge, Prandtl-Meyer normal and oblique states,
//! detachment and sonic angles).
//!
//! All quantities live in the self-similar plane. A constant state with
//! velocity `v` and additive constant `C` has pseudo-potential
//! `phi(xi) = -|xi|^2/2 + v.xi + C` and pseudo-velocity `D phi = v - xi`;
//! its density and sound speed follow from the Bernoulli closure and are
//! independent of `xi`.

use crate::num::{scan_brackets, solve_bracketed, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual tolerance for the algebraic root solves.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Absolute tolerance for angle bisections (radians).
pub const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GasError {
    #[error("vacuum: Bernoulli closure base {base:.6e} is negative")]
    Vacuum { base: f64 },
    #[error("entropy violation: downstream density {down} must exceed upstream {up}")]
    Entropy { up: f64, down: f64 },
    #[error("no reflected state: wedge angle {theta_w} below detachment angle")]
    Detachment { theta_w: f64 },
    #[error("incoming state is not supersonic at the origin (|v| = {speed}, c = {sound})")]
    SupersonicInflow { speed: f64, sound: f64 },
    #[error("root solve failed: {0}")]
    Convergence(String),
    #[error("invalid gas parameters: {0}")]
    InvalidParams(String),
}

/// Adiabatic exponent and reference density fixing all closures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub gamma: f64,
    pub rho0: f64,
}

impl GasParams {
    pub fn new(gamma: f64, rho0: f64) -> Result<Self, GasError> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(GasError::InvalidParams(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(rho0 > 0.0) || !rho0.is_finite() {
            return Err(GasError::InvalidParams(format!("rho0 must be positive, got {rho0}")));
        }
        Ok(GasParams { gamma, rho0 })
    }

    /// rho0^(gamma-1), the closure constant.
    pub fn rho0_pow(&self) -> f64 {
        self.rho0.powf(self.gamma - 1.0)
    }
}

/// Bernoulli closure base: rho0^(g-1) - (g-1)(z + q_sq/2). Equals both
/// rho^(g-1) and c^2 where nonnegative.
fn closure_base(q_sq: f64, z: f64, params: &GasParams) -> f64 {
    params.rho0_pow() - (params.gamma - 1.0) * (z + 0.5 * q_sq)
}

/// Density rho(|D phi|^2, phi).
pub fn density(q_sq: f64, z: f64, params: &GasParams) -> Result<f64, GasError> {
    let base = closure_base(q_sq, z, params);
    if base < 0.0 {
        return Err(GasError::Vacuum { base });
    }
    Ok(base.powf(1.0 / (params.gamma - 1.0)))
}

/// Squared sound speed c^2(|D phi|^2, phi) = rho^(gamma-1).
pub fn sound_speed_sq(q_sq: f64, z: f64, params: &GasParams) -> Result<f64, GasError> {
    let base = closure_base(q_sq, z, params);
    if base < 0.0 {
        return Err(GasError::Vacuum { base });
    }
    Ok(base)
}

/// Ellipticity margin c_star^2(phi) - |D phi|^2 with
/// c_star^2 = 2/(gamma+1) (rho0^(g-1) - (g-1) phi). Positive iff the
/// equation is strictly elliptic at this state; its sign agrees with the
/// sign of c^2 - |D phi|^2.
pub fn ellipticity_margin(grad_phi: Vec2, z: f64, params: &GasParams) -> Result<f64, GasError> {
    let q_sq = grad_phi.norm_sq();
    let base = closure_base(q_sq, z, params);
    if base < 0.0 {
        return Err(GasError::Vacuum { base });
    }
    let c_star_sq = 2.0 / (params.gamma + 1.0) * (params.rho0_pow() - (params.gamma - 1.0) * z);
    Ok(c_star_sq - q_sq)
}

/// A uniform state of the self-similar equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantState {
    pub velocity: Vec2,
    pub constant: f64,
    pub density: f64,
    pub sound_speed: f64,
}

impl ConstantState {
    /// Build from velocity and additive constant; density and sound speed
    /// come from the closure evaluated on the constant-state form (which is
    /// xi-independent: phi + |D phi|^2/2 = C + |v|^2/2).
    pub fn new(velocity: Vec2, constant: f64, params: &GasParams) -> Result<Self, GasError> {
        let invariant = constant + 0.5 * velocity.norm_sq();
        let c_sq = sound_speed_sq(0.0, invariant, params)?;
        let rho = density(0.0, invariant, params)?;
        if rho <= 0.0 {
            return Err(GasError::Vacuum { base: c_sq });
        }
        Ok(ConstantState { velocity, constant, density: rho, sound_speed: c_sq.sqrt() })
    }

    /// Pseudo-potential value at xi.
    pub fn potential(&self, xi: Vec2) -> f64 {
        -0.5 * xi.norm_sq() + self.velocity.dot(xi) + self.constant
    }

    /// Pseudo-velocity D phi = v - xi.
    pub fn pseudo_velocity(&self, xi: Vec2) -> Vec2 {
        self.velocity - xi
    }

    /// Value and gradient together.
    pub fn potential_and_gradient(&self, xi: Vec2) -> (f64, Vec2) {
        (self.potential(xi), self.pseudo_velocity(xi))
    }

    pub fn sonic_circle(&self) -> SonicCircle {
        SonicCircle { center: self.velocity, radius: self.sound_speed }
    }

    /// Galilean shift: the state whose potential is phi(xi - xi0).
    pub fn shifted(&self, xi0: Vec2, params: &GasParams) -> Result<ConstantState, GasError> {
        let v = self.velocity + xi0;
        let c = self.constant - self.velocity.dot(xi0) - 0.5 * xi0.norm_sq();
        ConstantState::new(v, c, params)
    }
}

/// Sonic circle of a constant state: the equation is elliptic for that state
/// exactly inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SonicCircle {
    pub center: Vec2,
    pub radius: f64,
}

pub fn sonic_circle(state: &ConstantState) -> SonicCircle {
    state.sonic_circle()
}

/// Rankine-Hugoniot residuals at a point of a candidate shock with unit
/// normal `normal`: mass-flux jump and potential jump between an upstream
/// constant state and downstream data (D phi, phi).
pub fn rh_residual(
    up: &ConstantState,
    down_grad: Vec2,
    down_value: f64,
    normal: Vec2,
    xi: Vec2,
    params: &GasParams,
) -> Result<(f64, f64), GasError> {
    let rho_down = density(down_grad.norm_sq(), down_value, params)?;
    let up_grad = up.pseudo_velocity(xi);
    let mass = rho_down * down_grad.dot(normal) - up.density * up_grad.dot(normal);
    let pot = down_value - up.potential(xi);
    Ok((mass, pot))
}

/// State (1) behind a vertical incident shock moving into the rest state of
/// density rho0, plus the shock location xi1_0 = rho1 u1 / (rho1 - rho0).
///
/// Eliminating the additive constant from the two RH conditions gives
/// u1^2 = 2 (rho1 - rho0)(rho1^(g-1) - rho0^(g-1)) / ((g-1)(rho1 + rho0)),
/// and the unique positive root is taken.
pub fn incident_shock_state(rho1: f64, params: &GasParams) -> Result<(ConstantState, f64), GasError> {
    if rho1 <= params.rho0 {
        return Err(GasError::Entropy { up: params.rho0, down: rho1 });
    }
    let g = params.gamma;
    let u1_sq = 2.0 * (rho1 - params.rho0) * (rho1.powf(g - 1.0) - params.rho0.powf(g - 1.0))
        / ((g - 1.0) * (rho1 + params.rho0));
    let u1 = u1_sq.sqrt();
    let xi1_0 = rho1 * u1 / (rho1 - params.rho0);
    let state = ConstantState::new(Vec2::new(u1, 0.0), -u1 * xi1_0, params)?;
    debug_assert!((state.density - rho1).abs() < 1e-9 * rho1);
    Ok((state, xi1_0))
}

/// Both solutions of the reflected-state system at the reflection point.
#[derive(Debug, Clone, Copy)]
pub struct ReflectedStates {
    pub weak: ConstantState,
    pub strong: ConstantState,
}

/// Reflection point P0 = intersection of the incident shock with the wedge
/// boundary.
pub fn reflection_point(xi1_0: f64, theta_w: f64) -> Vec2 {
    Vec2::new(xi1_0, xi1_0 * theta_w.tan())
}

/// Mass-flux residual of the reflected-state system as a function of the
/// wedge-parallel speed u2, with the slip and potential-continuity conditions
/// eliminated exactly.
struct State2System {
    p0: Vec2,
    state1: ConstantState,
    phi1_p0: f64,
    tan_w: f64,
    params: GasParams,
}

impl State2System {
    fn new(state1: &ConstantState, xi1_0: f64, theta_w: f64, params: &GasParams) -> Self {
        let p0 = reflection_point(xi1_0, theta_w);
        State2System {
            p0,
            state1: *state1,
            phi1_p0: state1.potential(p0),
            tan_w: theta_w.tan(),
            params: *params,
        }
    }

    fn velocity(&self, u2: f64) -> Vec2 {
        Vec2::new(u2, u2 * self.tan_w)
    }

    fn constant(&self, u2: f64) -> f64 {
        // phi2(P0) = phi1(P0).
        self.phi1_p0 + 0.5 * self.p0.norm_sq() - self.velocity(u2).dot(self.p0)
    }

    fn state(&self, u2: f64) -> Result<ConstantState, GasError> {
        ConstantState::new(self.velocity(u2), self.constant(u2), &self.params)
    }

    /// Largest u2 for which the closure stays nonnegative.
    fn admissible_hi(&self) -> f64 {
        // closure invariant: C2(u2) + |v2|^2/2 with C2 affine in u2.
        // Solve base(u2) = 0 for the positive root.
        let g1 = self.params.gamma - 1.0;
        let sec_sq = 1.0 + self.tan_w * self.tan_w;
        // base = rho0p - g1*(phi1_p0 + |p0|^2/2 - u2*(p0.x + p0.y tanw) + u2^2 sec^2/2)
        let a = -g1 * 0.5 * sec_sq;
        let b = g1 * (self.p0.x + self.p0.y * self.tan_w);
        let c = self.params.rho0_pow() - g1 * (self.phi1_p0 + 0.5 * self.p0.norm_sq());
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return 0.0;
        }
        // a < 0: base >= 0 between the roots; the upper root bounds u2.
        (-b - disc.sqrt()) / (2.0 * a)
    }

    fn residual(&self, u2: f64) -> f64 {
        let v2 = self.velocity(u2);
        let dv = self.state1.velocity - v2;
        let nrm = dv.norm();
        if nrm == 0.0 {
            return f64::NAN;
        }
        let nu = dv / nrm;
        let state2 = match self.state(u2) {
            Ok(s) => s,
            Err(_) => return f64::NAN,
        };
        state2.density * state2.pseudo_velocity(self.p0).dot(nu)
            - self.state1.density * self.state1.pseudo_velocity(self.p0).dot(nu)
    }
}

/// Solve the three-equation reflected-state system at P0 for a wedge angle in
/// the admissible range. Returns the two roots sorted by density (weak first).
pub fn solve_reflection_state2(
    rho1: f64,
    params: &GasParams,
    theta_w: f64,
) -> Result<ReflectedStates, GasError> {
    let (state1, xi1_0) = incident_shock_state(rho1, params)?;
    solve_state2_given(&state1, xi1_0, theta_w, params)
}

fn solve_state2_given(
    state1: &ConstantState,
    xi1_0: f64,
    theta_w: f64,
    params: &GasParams,
) -> Result<ReflectedStates, GasError> {
    let sys = State2System::new(state1, xi1_0, theta_w, params);
    let hi = sys.admissible_hi();
    if !(hi > 0.0) {
        return Err(GasError::Detachment { theta_w });
    }
    let lo = 1e-12 * hi;
    let hi = hi * (1.0 - 1e-12);
    let brackets = scan_brackets(|u| sys.residual(u), lo, hi, 401);
    let mut roots: Vec<f64> = Vec::new();
    for (a, b) in brackets {
        if let Some(r) = solve_bracketed(|u| sys.residual(u), a, b, 1e-15 * hi.max(1.0), 0.0) {
            if roots.iter().all(|&x| (x - r.x).abs() > 1e-9 * hi.max(1.0)) {
                roots.push(r.x);
            }
        }
    }
    let mut states: Vec<ConstantState> = Vec::new();
    for &u in &roots {
        let s = sys.state(u)?;
        if s.density > state1.density {
            states.push(s);
        }
    }
    match states.len() {
        0 => Err(GasError::Detachment { theta_w }),
        1 => Ok(ReflectedStates { weak: states[0], strong: states[0] }),
        _ => {
            states.sort_by(|a, b| a.density.partial_cmp(&b.density).unwrap());
            if states.len() > 2 {
                return Err(GasError::Convergence(format!(
                    "{} admissible reflected roots at theta_w = {theta_w}",
                    states.len()
                )));
            }
            Ok(ReflectedStates { weak: states[0], strong: states[1] })
        }
    }
}

/// Detachment angle: infimum of wedge angles for which the reflected-state
/// system has real solutions, located by bisection on root existence and
/// polished by a Newton solve of the double-root system.
pub fn detachment_angle(rho1: f64, params: &GasParams) -> Result<f64, GasError> {
    let (state1, xi1_0) = incident_shock_state(rho1, params)?;
    let exists = |theta: f64| solve_state2_given(&state1, xi1_0, theta, params).is_ok();
    let mut hi = std::f64::consts::FRAC_PI_2 * (1.0 - 1e-9);
    if !exists(hi) {
        return Err(GasError::Convergence(
            "reflected state does not exist even near the normal angle".into(),
        ));
    }
    let mut lo = 1e-6;
    if exists(lo) {
        // Detached regime never reached; report the lower end of the scan.
        return Ok(lo);
    }
    while hi - lo > ANGLE_TOL {
        let mid = 0.5 * (lo + hi);
        if exists(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Polish the fold: solve F(u, theta) = 0, dF/du = 0 for the double root.
    let roots = solve_state2_given(&state1, xi1_0, hi, params)?;
    let u0 = 0.5 * (roots.weak.velocity.x + roots.strong.velocity.x);
    let theta = polish_double_root(
        |u, theta| State2System::new(&state1, xi1_0, theta, params).residual(u),
        u0,
        0.5 * (lo + hi),
    )
    .filter(|t| (t - 0.5 * (lo + hi)).abs() < 10.0 * ANGLE_TOL)
    .unwrap_or(0.5 * (lo + hi));
    Ok(theta)
}

/// Newton iteration on (F, dF/du) = 0 in the unknowns (u, theta), with
/// finite-difference derivatives. Returns the fold angle.
fn polish_double_root<F: Fn(f64, f64) -> f64>(f: F, u0: f64, theta0: f64) -> Option<f64> {
    let mut u = u0;
    let mut theta = theta0;
    let hu = 1e-7 * (1.0 + u.abs());
    let ht = 1e-9;
    for _ in 0..60 {
        let fu = |uu: f64, tt: f64| (f(uu + hu, tt) - f(uu - hu, tt)) / (2.0 * hu);
        let g1 = f(u, theta);
        let g2 = fu(u, theta);
        let a11 = fu(u, theta);
        let a12 = (f(u, theta + ht) - f(u, theta - ht)) / (2.0 * ht);
        let a21 = (fu(u + hu, theta) - fu(u - hu, theta)) / (2.0 * hu);
        let a22 = (fu(u, theta + ht) - fu(u, theta - ht)) / (2.0 * ht);
        let det = a11 * a22 - a12 * a21;
        if !det.is_finite() || det.abs() < 1e-300 {
            return None;
        }
        let du = (g1 * a22 - g2 * a12) / det;
        let dt = (a11 * g2 - a21 * g1) / det;
        u -= du;
        theta -= dt;
        if !u.is_finite() || !theta.is_finite() {
            return None;
        }
        if du.abs() < 1e-13 * (1.0 + u.abs()) && dt.abs() < 1e-14 {
            return Some(theta);
        }
    }
    Some(theta)
}

/// The two Prandtl-Meyer constant states, with the sonic and detachment
/// angles of the configuration.
#[derive(Debug, Clone, Copy)]
pub struct PrandtlStates {
    /// Normal-reflection state: slip on the ramp, straight shock parallel to it.
    pub state_n: ConstantState,
    /// Weak oblique state: slip on the ramp, straight shock through the origin.
    pub state_o: ConstantState,
    /// Wedge angle at which the oblique state changes type at the origin.
    pub theta_s: f64,
    /// Detachment angle of the oblique root system.
    pub theta_d: f64,
    /// Signed distance of the normal shock from the ramp.
    pub normal_shock_offset: f64,
}

/// Closure parameters for the ramp problem: reference density is the incoming
/// density, and the incoming state with velocity (u_inf, 0) carries the
/// additive constant -u_inf^2/2 so the closure reproduces rho_inf exactly.
pub fn prandtl_incoming(rho_inf: f64, u_inf: f64, gamma: f64) -> Result<(GasParams, ConstantState), GasError> {
    let params = GasParams::new(gamma, rho_inf)?;
    let state = ConstantState::new(Vec2::new(u_inf, 0.0), -0.5 * u_inf * u_inf, &params)?;
    Ok((params, state))
}

/// Oblique-state mass residual as a function of the wedge-parallel speed q.
fn prandtl_oblique_residual(q: f64, tau_w: Vec2, inflow: &ConstantState, params: &GasParams) -> f64 {
    let v_o = tau_w * q;
    let dv = inflow.velocity - v_o;
    let nrm = dv.norm();
    if nrm == 0.0 {
        return f64::NAN;
    }
    let nu = dv / nrm;
    let state = match ConstantState::new(v_o, inflow.constant, params) {
        Ok(s) => s,
        Err(_) => return f64::NAN,
    };
    // On the line through the origin normal to dv, D phi . nu is constant:
    state.density * v_o.dot(nu) - inflow.density * inflow.velocity.dot(nu)
}

fn prandtl_oblique_weak(
    theta_w: f64,
    inflow: &ConstantState,
    params: &GasParams,
) -> Result<ConstantState, GasError> {
    let tau_w = Vec2::from_angle(theta_w);
    let u_inf = inflow.velocity.x;
    // Admissible q: closure base at (C_inf, q^2/2) nonnegative.
    let g1 = params.gamma - 1.0;
    let base0 = params.rho0_pow() - g1 * inflow.constant;
    let q_max = (2.0 * base0 / g1).sqrt() * (1.0 - 1e-12);
    let brackets = scan_brackets(
        |q| prandtl_oblique_residual(q, tau_w, inflow, params),
        1e-9 * u_inf,
        q_max,
        801,
    );
    let mut roots = Vec::new();
    for (a, b) in brackets {
        if let Some(r) = solve_bracketed(
            |q| prandtl_oblique_residual(q, tau_w, inflow, params),
            a,
            b,
            1e-15 * u_inf,
            0.0,
        ) {
            if roots.iter().all(|&x: &f64| (x - r.x).abs() > 1e-8 * u_inf) {
                roots.push(r.x);
            }
        }
    }
    let mut states: Vec<ConstantState> = Vec::new();
    for &q in &roots {
        let s = ConstantState::new(tau_w * q, inflow.constant, params)?;
        if s.density > inflow.density {
            states.push(s);
        }
    }
    if states.is_empty() {
        return Err(GasError::Detachment { theta_w });
    }
    // Weak root: the smaller density.
    states.sort_by(|a, b| a.density.partial_cmp(&b.density).unwrap());
    Ok(states[0])
}

/// Normal-reflection state for the ramp: velocity u_inf cos(theta) along the
/// ramp, density from the one-dimensional shock relation in the ramp-normal
/// direction, shock offset n_s = rho_inf a / (rho_n - rho_inf) with
/// a = u_inf sin(theta).
fn prandtl_normal(
    theta_w: f64,
    inflow: &ConstantState,
    params: &GasParams,
) -> Result<(ConstantState, f64), GasError> {
    let u_inf = inflow.velocity.x;
    let a = u_inf * theta_w.sin();
    let rho_inf = inflow.density;
    let g = params.gamma;
    // rho_n^(g-1) - rho_inf^(g-1) = (g-1) a^2 (rho_n + rho_inf) / (2 (rho_n - rho_inf))
    let res = |rho_n: f64| {
        rho_n.powf(g - 1.0) - rho_inf.powf(g - 1.0)
            - (g - 1.0) * a * a * (rho_n + rho_inf) / (2.0 * (rho_n - rho_inf))
    };
    // Bracket: just above rho_inf the RHS dominates (res < 0); res grows for
    // large rho_n.
    let mut hi = rho_inf * 2.0;
    let lo = rho_inf * (1.0 + 1e-10);
    while res(hi) < 0.0 {
        hi *= 2.0;
        if hi > rho_inf * 1e8 {
            return Err(GasError::Convergence("normal-shock density bracket failed".into()));
        }
    }
    let root = solve_bracketed(res, lo, hi, 1e-15 * rho_inf, 0.0)
        .ok_or_else(|| GasError::Convergence("normal-shock density solve failed".into()))?;
    let rho_n = root.x;
    let n_s = rho_inf * a / (rho_n - rho_inf);
    let tau_w = Vec2::from_angle(theta_w);
    let v_n = tau_w * (u_inf * theta_w.cos());
    let c_n = inflow.constant - a * n_s;
    let state = ConstantState::new(v_n, c_n, params)?;
    Ok((state, n_s))
}

/// Prandtl-Meyer states and angles for an incoming supersonic stream hitting
/// a ramp of angle theta_w.
pub fn prandtl_states(
    rho_inf: f64,
    u_inf: f64,
    gamma: f64,
    theta_w: f64,
) -> Result<PrandtlStates, GasError> {
    let (params, inflow) = prandtl_incoming(rho_inf, u_inf, gamma)?;
    if u_inf <= inflow.sound_speed {
        return Err(GasError::SupersonicInflow { speed: u_inf, sound: inflow.sound_speed });
    }
    let theta_d = prandtl_detachment(&inflow, &params)?;
    if theta_w >= theta_d {
        return Err(GasError::Detachment { theta_w });
    }
    if theta_w <= 0.0 {
        return Err(GasError::InvalidParams(format!("theta_w must be positive, got {theta_w}")));
    }
    let theta_s = prandtl_sonic_angle(&inflow, &params, theta_d)?;
    let state_o = prandtl_oblique_weak(theta_w, &inflow, &params)?;
    let (state_n, n_s) = prandtl_normal(theta_w, &inflow, &params)?;
    Ok(PrandtlStates { state_n, state_o, theta_s, theta_d, normal_shock_offset: n_s })
}

fn prandtl_detachment(inflow: &ConstantState, params: &GasParams) -> Result<f64, GasError> {
    let exists = |theta: f64| prandtl_oblique_weak(theta, inflow, params).is_ok();
    let mut lo = 1e-6;
    if !exists(lo) {
        return Err(GasError::Convergence("oblique state missing at zero ramp angle".into()));
    }
    let mut hi = std::f64::consts::FRAC_PI_2 - 1e-6;
    if exists(hi) {
        return Ok(hi);
    }
    while hi - lo > ANGLE_TOL {
        let mid = 0.5 * (lo + hi);
        if exists(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn prandtl_sonic_angle(
    inflow: &ConstantState,
    params: &GasParams,
    theta_d: f64,
) -> Result<f64, GasError> {
    // Supersonic at the origin iff |v_O| > c_O for the weak root.
    let margin = |theta: f64| -> f64 {
        match prandtl_oblique_weak(theta, inflow, params) {
            Ok(s) => s.velocity.norm() - s.sound_speed,
            Err(_) => f64::NAN,
        }
    };
    let mut lo = 1e-6;
    let mut hi = theta_d - 1e-9;
    let m_lo = margin(lo);
    let m_hi = margin(hi);
    if !(m_lo > 0.0) || !(m_hi < 0.0) {
        return Err(GasError::Convergence(format!(
            "sonic-angle bracket failed: margin({lo}) = {m_lo}, margin({hi}) = {m_hi}"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(gamma: f64, rho0: f64) -> GasParams {
        GasParams::new(gamma, rho0).unwrap()
    }

    #[test]
    fn density_reference_state() {
        let p = params(2.0, 1.0);
        assert_eq!(density(0.0, 0.0, &p).unwrap(), 1.0);
        assert!((density(1.0, 0.0, &p).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_matches_log_domain_oracle() {
        // Oracle: evaluate the closure in the log domain.
        let p = params(1.4, 1.0);
        let (q_sq, z) = (0.3f64, -0.2f64);
        let base: f64 = 1.0 - 0.4 * (z + 0.5 * q_sq);
        let oracle = ((1.0 / 0.4) * base.ln()).exp();
        let rho = density(q_sq, z, &p).unwrap();
        assert!((rho - oracle).abs() < 1e-14 * oracle);
        assert!((rho - (1.0f64 - 0.4 * (-0.05)).powf(2.5)).abs() < 1e-14);
    }

    #[test]
    fn vacuum_is_an_error() {
        let p = params(1.4, 1.0);
        assert!(matches!(density(100.0, 0.0, &p), Err(GasError::Vacuum { .. })));
    }

    #[test]
    fn sound_speed_examples() {
        let p = params(2.0, 1.0);
        assert!((sound_speed_sq(0.5, 0.1, &p).unwrap() - 0.65).abs() < 1e-15);
        // Identity with the density closure.
        let rho = density(0.5, 0.1, &p).unwrap();
        let c2 = sound_speed_sq(0.5, 0.1, &p).unwrap();
        assert!((c2 - rho.powf(p.gamma - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn ellipticity_margin_rest_state_and_sonic_circle() {
        let p = params(1.4, 1.0);
        let m = ellipticity_margin(Vec2::ZERO, 0.0, &p).unwrap();
        assert!((m - 2.0 / 2.4).abs() < 1e-15);

        let state = ConstantState::new(Vec2::new(0.3, -0.1), 0.05, &p).unwrap();
        let circ = state.sonic_circle();
        for k in 0..8 {
            let e = Vec2::from_angle(k as f64 * std::f64::consts::PI / 4.0);
            let xi = circ.center + e * circ.radius;
            let m =
                ellipticity_margin(state.pseudo_velocity(xi), state.potential(xi), &p).unwrap();
            assert!(m.abs() < 1e-12, "margin on sonic circle = {m}");
        }
    }

    #[test]
    fn constant_state_potential_example() {
        let p = params(1.4, 10.0);
        let s = ConstantState::new(Vec2::new(1.0, 2.0), 3.0, &p).unwrap();
        let (v, g) = s.potential_and_gradient(Vec2::new(0.5, -1.0));
        assert!((v - 0.875).abs() < 1e-15);
        assert!((g - Vec2::new(0.5, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn incident_shock_reference_case() {
        let p = params(2.0, 1.0);
        let (s1, xi1_0) = incident_shock_state(2.0, &p).unwrap();
        assert!((s1.velocity.x - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((xi1_0 - 2.0 * s1.velocity.x).abs() < 1e-14);
        assert!((s1.density - 2.0).abs() < 1e-12);
        // Both RH residuals vanish on the incident shock line.
        for t in [-1.0, 0.0, 2.5] {
            let xi = Vec2::new(xi1_0, t);
            let state0 = ConstantState::new(Vec2::ZERO, 0.0, &p).unwrap();
            let (m, q) = rh_residual(
                &state0,
                s1.pseudo_velocity(xi),
                s1.potential(xi),
                Vec2::new(-1.0, 0.0),
                xi,
                &p,
            )
            .unwrap();
            assert!(m.abs() < 1e-12, "mass residual {m}");
            assert!(q.abs() < 1e-12, "potential residual {q}");
        }
    }

    #[test]
    fn incident_shock_vanishing_strength() {
        let p = params(1.4, 1.0);
        let mut prev_xi = None;
        for drho in [1e-3, 1e-4, 1e-5] {
            let (s1, xi1_0) = incident_shock_state(1.0 + drho, &p).unwrap();
            assert!(s1.velocity.x < 0.1);
            if let Some(prev) = prev_xi {
                let diff: f64 = xi1_0 - prev;
                assert!(diff.abs() < 0.05);
            }
            prev_xi = Some(xi1_0);
        }
        // Limit: xi1_0 -> c0 = 1 as the shock weakens (sonic point).
        let (_, xi) = incident_shock_state(1.0 + 1e-8, &p).unwrap();
        assert!((xi - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rh_residual_perturbation_linearity() {
        let p = params(1.4, 1.0);
        let up = ConstantState::new(Vec2::ZERO, 0.0, &p).unwrap();
        let xi = Vec2::new(0.5, 0.2);
        let delta = 1e-3;
        let (_, q0) =
            rh_residual(&up, Vec2::new(0.1, 0.0), up.potential(xi), Vec2::new(1.0, 0.0), xi, &p)
                .unwrap();
        let (_, q1) = rh_residual(
            &up,
            Vec2::new(0.1, 0.0),
            up.potential(xi) + delta,
            Vec2::new(1.0, 0.0),
            xi,
            &p,
        )
        .unwrap();
        assert!((q1 - q0 - delta).abs() < 1e-15);
    }

    #[test]
    fn state2_residuals_and_ordering() {
        let p = params(2.0, 1.0);
        let theta_d = detachment_angle(2.0, &p).unwrap();
        let theta_w = 0.5 * (theta_d + std::f64::consts::FRAC_PI_2);
        let roots = solve_reflection_state2(2.0, &p, theta_w).unwrap();
        assert!(roots.weak.density < roots.strong.density);
        let (s1, xi1_0) = incident_shock_state(2.0, &p).unwrap();
        let p0 = reflection_point(xi1_0, theta_w);
        for s2 in [roots.weak, roots.strong] {
            assert!(s2.density > s1.density, "entropy across reflected shock");
            // Slip condition through v2 = u2 tan(theta).
            let nu_w = Vec2::new(-theta_w.sin(), theta_w.cos());
            assert!(s2.pseudo_velocity(p0).dot(nu_w).abs() < 1e-9);
            // RH between (1) and (2) at P0 along the shock normal.
            let nu = (s1.velocity - s2.velocity).normalized();
            let (m, q) =
                rh_residual(&s1, s2.pseudo_velocity(p0), s2.potential(p0), nu, p0, &p).unwrap();
            assert!(m.abs() < 1e-10, "state2 mass residual {m}");
            assert!(q.abs() < 1e-10, "state2 potential residual {q}");
        }
    }

    #[test]
    fn state2_near_normal_tends_to_normal_reflection() {
        let p = params(2.0, 1.0);
        let theta_w = std::f64::consts::FRAC_PI_2 - 1e-4;
        let roots = solve_reflection_state2(2.0, &p, theta_w).unwrap();
        // Near-normal: the weak state nearly stops the flow (u2 -> 0, v2 finite).
        assert!(roots.weak.velocity.x.abs() < 1e-2);
        assert!(
            (roots.weak.velocity.y - roots.weak.velocity.x * theta_w.tan()).abs()
                < 1e-12 * (1.0 + roots.weak.velocity.y.abs())
        );
    }

    #[test]
    fn detachment_angle_flips_root_existence() {
        let p = params(1.4, 1.0);
        let theta_d = detachment_angle(1.5, &p).unwrap();
        assert!(theta_d > 0.0 && theta_d < std::f64::consts::FRAC_PI_2);
        assert!(solve_reflection_state2(1.5, &p, theta_d + 1e-6).is_ok());
        assert!(solve_reflection_state2(1.5, &p, theta_d - 1e-6).is_err());
        // Near the fold the two roots coalesce.
        let roots = solve_reflection_state2(1.5, &p, theta_d + 1e-12).unwrap();
        let sep = (roots.weak.velocity - roots.strong.velocity).norm()
            + (roots.weak.constant - roots.strong.constant).abs();
        assert!(sep < 1e-4, "root separation at the fold: {sep:e}");
    }

    #[test]
    fn detachment_angle_frozen_regression() {
        // Frozen after first computation; oracle = dense scan of root existence.
        let p = params(1.4, 1.0);
        let theta_d = detachment_angle(1.5, &p).unwrap();
        let mut scan_lo = 0.0f64;
        let mut scan_hi = std::f64::consts::FRAC_PI_2;
        for i in 0..2000 {
            let th = 1e-4 + (std::f64::consts::FRAC_PI_2 - 2e-4) * i as f64 / 1999.0;
            if solve_reflection_state2(1.5, &p, th).is_ok() {
                scan_hi = scan_hi.min(th);
            } else {
                scan_lo = scan_lo.max(th);
            }
        }
        assert!(theta_d > scan_lo - 1e-3 && theta_d < scan_hi + 1e-3);
        let frozen = 0.558_639_861_941_345_5;
        assert!(
            (theta_d - frozen).abs() < 1e-9,
            "detachment angle drifted: {theta_d:.16} vs frozen {frozen:.16}"
        );
    }

    #[test]
    fn detachment_angle_continuity_sweep() {
        let p = params(1.4, 1.0);
        let mut prev: Option<f64> = None;
        let mut rho = 1.3;
        while rho < 1.31 {
            let th = detachment_angle(rho, &p).unwrap();
            if let Some(pr) = prev {
                assert!((th - pr).abs() < 1e-2, "jump in detachment angle at rho1 = {rho}");
            }
            prev = Some(th);
            rho += 1e-3;
        }
    }

    #[test]
    fn prandtl_states_basic() {
        let st = prandtl_states(1.0, 2.0, 1.4, 0.2).unwrap();
        assert!(st.theta_s < st.theta_d);
        let (params, inflow) = prandtl_incoming(1.0, 2.0, 1.4).unwrap();
        // Slip on the ramp for both states.
        let nu_w = Vec2::new(-0.2f64.sin(), 0.2f64.cos());
        assert!(st.state_n.velocity.dot(nu_w).abs() < 1e-12);
        assert!(st.state_o.velocity.dot(nu_w).abs() < 1e-12);
        assert!(st.state_o.density > inflow.density);
        assert!(st.state_n.density > inflow.density);

        // RH residuals on S_O (line through origin) and S_N (offset line).
        let nu_o = (inflow.velocity - st.state_o.velocity).normalized();
        let d_o = nu_o.perp();
        for s in [0.5, 1.7] {
            let xi = d_o * s;
            let (m, q) = rh_residual(
                &inflow,
                st.state_o.pseudo_velocity(xi),
                st.state_o.potential(xi),
                nu_o,
                xi,
                &params,
            )
            .unwrap();
            assert!(m.abs() < 1e-10 && q.abs() < 1e-10, "S_O residuals {m} {q}");
        }
        let tau_w = Vec2::from_angle(0.2);
        for s in [0.3, 2.0] {
            let xi = tau_w * s + nu_w * st.normal_shock_offset;
            let (m, q) = rh_residual(
                &inflow,
                st.state_n.pseudo_velocity(xi),
                st.state_n.potential(xi),
                nu_w,
                xi,
                &params,
            )
            .unwrap();
            assert!(m.abs() < 1e-10 && q.abs() < 1e-10, "S_N residuals {m} {q}");
        }
    }

    #[test]
    fn prandtl_zero_angle_limit() {
        let st = prandtl_states(1.0, 2.0, 1.4, 1e-4).unwrap();
        assert!((st.state_o.density - 1.0).abs() < 1e-2);
        assert!((st.state_o.velocity.norm() - 2.0).abs() < 1e-2);
    }

    #[test]
    fn prandtl_regime_flips_at_sonic_angle() {
        let st = prandtl_states(1.0, 2.0, 1.4, 0.2).unwrap();
        let (params, inflow) = prandtl_incoming(1.0, 2.0, 1.4).unwrap();
        let just_below = prandtl_oblique_weak(st.theta_s - 1e-6, &inflow, &params).unwrap();
        let just_above = prandtl_oblique_weak(st.theta_s + 1e-6, &inflow, &params).unwrap();
        assert!(just_below.velocity.norm() > just_below.sound_speed);
        assert!(just_above.velocity.norm() < just_above.sound_speed);
    }

    #[test]
    fn prandtl_subsonic_inflow_rejected() {
        assert!(matches!(
            prandtl_states(1.0, 0.5, 1.4, 0.2),
            Err(GasError::SupersonicInflow { .. })
        ));
    }

    #[test]
    fn galilean_shift_preserves_density() {
        let p = params(1.4, 1.0);
        let s = ConstantState::new(Vec2::new(0.4, -0.3), 0.1, &p).unwrap();
        let sh = s.shifted(Vec2::new(2.0, -5.0), &p).unwrap();
        assert!((sh.density - s.density).abs() < 1e-13);
        // Shifted potential equals the original at shifted argument.
        let xi = Vec2::new(0.7, 0.9);
        let xi0 = Vec2::new(2.0, -5.0);
        assert!((sh.potential(xi) - s.potential(xi - xi0)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn closure_monotone_in_q_and_z(
            gamma in 1.1f64..3.0,
            q in 0.0f64..0.5,
            z in -0.5f64..0.2,
        ) {
            let p = params(gamma, 1.0);
            let dq = 1e-4;
            let r0 = density(q, z, &p).unwrap();
            let r1 = density(q + dq, z, &p).unwrap();
            prop_assert!(r1 < r0);
            let r2 = density(q, z + dq, &p).unwrap();
            prop_assert!(r2 < r0);
        }

        #[test]
        fn ellipticity_criteria_agree_in_sign(
            gamma in 1.1f64..3.0,
            gx in -1.0f64..1.0,
            gy in -1.0f64..1.0,
            z in -0.4f64..0.2,
        ) {
            let p = params(gamma, 1.0);
            let g = Vec2::new(gx, gy);
            if let (Ok(margin), Ok(c2)) = (
                ellipticity_margin(g, z, &p),
                sound_speed_sq(g.norm_sq(), z, &p),
            ) {
                let direct = c2 - g.norm_sq();
                if margin.abs() > 1e-12 {
                    prop_assert_eq!(margin.signum(), direct.signum());
                }
            }
        }

        #[test]
        fn entropy_ordering_on_solved_shocks(
            gamma in 1.2f64..3.0,
            rho1 in 1.05f64..4.0,
            frac in 0.05f64..0.95,
        ) {
            let p = params(gamma, 1.0);
            let theta_d = detachment_angle(rho1, &p).unwrap();
            let theta_w = theta_d + frac * (std::f64::consts::FRAC_PI_2 - 1e-4 - theta_d);
            if let Ok(roots) = solve_reflection_state2(rho1, &p, theta_w) {
                let (s1, xi1_0) = incident_shock_state(rho1, &p).unwrap();
                let p0 = reflection_point(xi1_0, theta_w);
                for s2 in [roots.weak, roots.strong] {
                    prop_assert!(s2.density > s1.density);
                    // 0 < D phi_2 . nu < D phi_1 . nu with nu pointing downstream.
                    let nu = (s1.velocity - s2.velocity).normalized();
                    let up_flux = s1.pseudo_velocity(p0).dot(nu);
                    let down_flux = s2.pseudo_velocity(p0).dot(nu);
                    let sgn = up_flux.signum();
                    prop_assert!(sgn * up_flux > sgn * down_flux);
                    prop_assert!(sgn * down_flux > 0.0);
                }
            }
        }
    }
}
