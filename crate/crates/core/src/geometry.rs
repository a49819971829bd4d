//! Primal sets, cones, dual balls and their Euclidean projections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, norm_inf};

/// Simple closed convex primal set.
#[derive(Debug, Clone, PartialEq)]
pub enum SimpleSet {
    /// Componentwise bounds; infinite entries are allowed.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x >= 0 : sum(x) = scale}`.
    Simplex { scale: f64 },
    /// `{x >= 0 : <direction, x> = 0}`.
    NonnegWithLinearEq { direction: Vec<f64> },
}

impl SimpleSet {
    pub fn unbounded(n: usize) -> Self {
        SimpleSet::Box {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        SimpleSet::Box {
            lower: vec![-half_width; n],
            upper: vec![half_width; n],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Descriptor(msg));
        match self {
            SimpleSet::Box { lower, upper } => {
                if lower.len() != n || upper.len() != n {
                    return bad(format!(
                        "box bounds have lengths {}/{}, expected {n}",
                        lower.len(),
                        upper.len()
                    ));
                }
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return bad(format!("box is empty in coordinate {i}: [{l}, {u}]"));
                    }
                }
            }
            SimpleSet::Ball { center, radius } => {
                if center.len() != n {
                    return bad(format!("ball center has length {}, expected {n}", center.len()));
                }
                if !(*radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
                    return bad(format!("ball radius must be positive and finite, got {radius}"));
                }
            }
            SimpleSet::Simplex { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return bad(format!("simplex scale must be positive, got {scale}"));
                }
                if n == 0 {
                    return bad("simplex needs at least one coordinate".into());
                }
            }
            SimpleSet::NonnegWithLinearEq { direction } => {
                if direction.len() != n {
                    return bad(format!(
                        "linear-equality direction has length {}, expected {n}",
                        direction.len()
                    ));
                }
                if direction.iter().any(|b| !b.is_finite()) {
                    return bad("linear-equality direction must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Euclidean projection.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        match self {
            SimpleSet::Box { lower, upper } => w
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| x.max(*l).min(*u))
                .collect(),
            SimpleSet::Ball { center, radius } => {
                let d: Vec<f64> = w.iter().zip(center).map(|(a, c)| a - c).collect();
                let nd = norm(&d);
                if nd <= *radius {
                    w.to_vec()
                } else {
                    center
                        .iter()
                        .zip(&d)
                        .map(|(c, di)| c + di * radius / nd)
                        .collect()
                }
            }
            SimpleSet::Simplex { scale } => project_simplex(w, *scale),
            SimpleSet::NonnegWithLinearEq { direction } => project_nonneg_hyperplane(w, direction),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            SimpleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            SimpleSet::Ball { center, radius } => crate::linalg::dist(x, center) <= radius + tol,
            SimpleSet::Simplex { scale } => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - scale).abs() <= tol
            }
            SimpleSet::NonnegWithLinearEq { direction } => {
                x.iter().all(|v| *v >= -tol) && dot(direction, x).abs() <= tol
            }
        }
    }

    /// A Euclidean ball `(center, radius)` containing the set, if it is bounded.
    pub fn enclosing_ball(&self, n: usize) -> Option<(Vec<f64>, f64)> {
        match self {
            SimpleSet::Box { lower, upper } => {
                if lower.iter().chain(upper).any(|v| !v.is_finite()) {
                    return None;
                }
                let center = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
                let half: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (u - l)).collect();
                Some((center, norm(&half)))
            }
            SimpleSet::Ball { center, radius } => Some((center.clone(), *radius)),
            SimpleSet::Simplex { scale } => {
                let nf = n as f64;
                Some((vec![scale / nf; n], scale * (1.0 - 1.0 / nf).sqrt()))
            }
            SimpleSet::NonnegWithLinearEq { .. } => None,
        }
    }

    /// `min { <c, u> : u in set }`, or `None` when unbounded below.
    pub fn linear_min(&self, c: &[f64]) -> Option<f64> {
        match self {
            SimpleSet::Box { lower, upper } => {
                let mut total = 0.0;
                for (ci, (l, u)) in c.iter().zip(lower.iter().zip(upper)) {
                    let v = if *ci > 0.0 {
                        ci * l
                    } else if *ci < 0.0 {
                        ci * u
                    } else {
                        0.0
                    };
                    if !v.is_finite() {
                        return None;
                    }
                    total += v;
                }
                Some(total)
            }
            SimpleSet::Ball { center, radius } => Some(dot(c, center) - radius * norm(c)),
            SimpleSet::Simplex { scale } => {
                Some(scale * c.iter().cloned().fold(f64::INFINITY, f64::min))
            }
            SimpleSet::NonnegWithLinearEq { direction } => {
                // The set is a cone: the minimum is 0 when c + t*direction >= 0
                // for some t, and -inf otherwise.
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for (ci, bi) in c.iter().zip(direction) {
                    if *bi > 0.0 {
                        lo = lo.max(-ci / bi);
                    } else if *bi < 0.0 {
                        hi = hi.min(-ci / bi);
                    } else if *ci < 0.0 {
                        return None;
                    }
                }
                if lo <= hi + 1e-12 * (1.0 + lo.abs().min(hi.abs())) {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }
}

/// Projection onto `{x >= 0 : sum(x) = scale}` by sorting; ties keep index order.
pub fn project_simplex(w: &[f64], scale: f64) -> Vec<f64> {
    if w.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &idx) in order.iter().enumerate() {
        cumsum += w[idx];
        let t = (cumsum - scale) / (j as f64 + 1.0);
        if w[idx] - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    w.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projection onto `{x >= 0 : <b, x> = 0}` by bisection on the scalar multiplier
/// of the linear constraint, finished with an exact solve on the active support.
pub fn project_nonneg_hyperplane(w: &[f64], b: &[f64]) -> Vec<f64> {
    let at = |nu: f64| -> Vec<f64> { w.iter().zip(b).map(|(wi, bi)| (wi - nu * bi).max(0.0)).collect() };
    let bmin = b
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    if !bmin.is_finite() {
        return at(0.0);
    }
    let tol = 1e-12 * (1.0 + norm_inf(w) * b.iter().map(|v| v.abs()).sum::<f64>());
    let radius = norm_inf(w) / bmin + 1.0;
    let (mut lo, mut hi) = (-radius, radius);
    let mut nu = 0.0;
    for _ in 0..200 {
        nu = 0.5 * (lo + hi);
        let h = dot(b, &at(nu));
        if h.abs() <= tol {
            break;
        }
        if h > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
    }
    // h is piecewise linear; solve exactly on the support found by bisection.
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] - nu * b[i] > 0.0).collect();
    let denom: f64 = support.iter().map(|&i| b[i] * b[i]).sum();
    if denom > 0.0 {
        let exact = support.iter().map(|&i| b[i] * w[i]).sum::<f64>() / denom;
        let u = at(exact);
        let consistent = (0..w.len()).all(|i| (w[i] - exact * b[i] > 0.0) == support.contains(&i));
        if consistent && dot(b, &u).abs() <= tol {
            return u;
        }
    }
    at(nu)
}

/// Proper cone `K` of the conic constraint `g(x) in -K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cone {
    #[serde(rename = "nonneg")]
    NonnegOrthant { dim: usize },
    #[serde(rename = "soc")]
    SecondOrderCone { dim: usize },
    Product { parts: Vec<Cone> },
}

impl Cone {
    pub fn dim(&self) -> usize {
        match self {
            Cone::NonnegOrthant { dim } | Cone::SecondOrderCone { dim } => *dim,
            Cone::Product { parts } => parts.iter().map(Cone::dim).sum(),
        }
    }

    /// Every shipped cone is self-dual.
    pub fn dual(&self) -> Cone {
        self.clone()
    }

    pub fn is_orthant(&self) -> bool {
        match self {
            Cone::NonnegOrthant { .. } => true,
            Cone::SecondOrderCone { dim } => *dim <= 1,
            Cone::Product { parts } => parts.iter().all(Cone::is_orthant),
        }
    }

    /// Visits `(block, offset)` for each irreducible block.
    pub fn for_each_block(&self, mut f: impl FnMut(&Cone, usize)) {
        fn walk(c: &Cone, offset: &mut usize, f: &mut dyn FnMut(&Cone, usize)) {
            match c {
                Cone::Product { parts } => {
                    for p in parts {
                        walk(p, offset, f);
                    }
                }
                leaf => {
                    f(leaf, *offset);
                    *offset += leaf.dim();
                }
            }
        }
        let mut offset = 0;
        walk(self, &mut offset, &mut f);
    }

    /// Euclidean projection onto `K`.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let mut out = w.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, w: &mut [f64]) {
        self.for_each_block(|block, off| {
            let seg = &mut w[off..off + block.dim()];
            match block {
                Cone::NonnegOrthant { .. } => seg.iter_mut().for_each(|v| *v = v.max(0.0)),
                Cone::SecondOrderCone { .. } => project_soc_in_place(seg),
                Cone::Product { .. } => unreachable!(),
            }
        });
    }

    /// Projection onto the dual cone `K*`.
    pub fn project_dual(&self, w: &[f64]) -> Vec<f64> {
        self.dual().project(w)
    }

    /// Projection onto `-K`, the polar of `K*`.
    pub fn project_neg(&self, w: &[f64]) -> Vec<f64> {
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        self.project(&neg).into_iter().map(|v| -v).collect()
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        let mut ok = true;
        self.for_each_block(|block, off| {
            let seg = &w[off..off + block.dim()];
            ok &= match block {
                Cone::NonnegOrthant { .. } => seg.iter().all(|v| *v >= -tol),
                Cone::SecondOrderCone { .. } => {
                    seg.is_empty() || norm(&seg[1..]) <= seg[0] + tol
                }
                Cone::Product { .. } => unreachable!(),
            };
        });
        ok
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.dim() != m {
            return Err(Error::Descriptor(format!(
                "cone dimension {} does not match m = {m}",
                self.dim()
            )));
        }
        Ok(())
    }
}

fn project_soc_in_place(w: &mut [f64]) {
    if w.is_empty() {
        return;
    }
    let t = w[0];
    let nu = norm(&w[1..]);
    if nu <= t {
        return;
    }
    if nu <= -t {
        w.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let a = 0.5 * (t + nu);
    w[0] = a;
    for v in w[1..].iter_mut() {
        *v *= a / nu;
    }
}

/// Multiplier domain for the constraint block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualDomain {
    /// `lambda` ranges over the dual cone `K*`.
    #[default]
    Cone,
    /// `lambda` ranges over the unit simplex (min-max models such as kernel learning).
    Simplex,
}

/// Optional bound on the dual iterates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DualBall {
    #[default]
    Unbounded,
    JointBall { radius: f64 },
    SplitBall { radius_v: f64, radius_lambda: f64 },
}

impl DualBall {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DualBall::Unbounded => true,
            DualBall::JointBall { radius } => *radius > 0.0,
            DualBall::SplitBall {
                radius_v,
                radius_lambda,
            } => *radius_v > 0.0 && *radius_lambda > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("dual ball radii must be positive: {self:?}")))
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, DualBall::Unbounded)
    }

    /// Joint radius bounding `||(v, lambda)||`, `+inf` when unbounded.
    pub fn radius(&self) -> f64 {
        match self {
            DualBall::Unbounded => f64::INFINITY,
            DualBall::JointBall { radius } => *radius,
            DualBall::SplitBall {
                radius_v,
                radius_lambda,
            } => radius_v.hypot(*radius_lambda),
        }
    }

    /// Radial projection of `(v, lam)` onto the ball.
    pub fn project(&self, v: &mut [f64], lam: &mut [f64]) {
        match *self {
            DualBall::Unbounded => {}
            DualBall::JointBall { radius } => {
                let nrm = (crate::linalg::norm_sq(v) + crate::linalg::norm_sq(lam)).sqrt();
                if nrm > radius {
                    let s = radius / nrm;
                    v.iter_mut().chain(lam.iter_mut()).for_each(|x| *x *= s);
                }
            }
            DualBall::SplitBall {
                radius_v,
                radius_lambda,
            } => {
                scale_into_ball(v, radius_v);
                scale_into_ball(lam, radius_lambda);
            }
        }
    }

    pub fn contains(&self, v: &[f64], lam: &[f64], tol: f64) -> bool {
        match *self {
            DualBall::Unbounded => true,
            DualBall::JointBall { radius } => {
                (crate::linalg::norm_sq(v) + crate::linalg::norm_sq(lam)).sqrt() <= radius + tol
            }
            DualBall::SplitBall {
                radius_v,
                radius_lambda,
            } => norm(v) <= radius_v + tol && norm(lam) <= radius_lambda + tol,
        }
    }
}

fn scale_into_ball(x: &mut [f64], radius: f64) {
    let nrm = norm(x);
    if nrm > radius {
        let s = radius / nrm;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// Projection onto `Y-hat = (R^p x Lambda) ∩ ball`, where `Lambda` is `K*`
/// or the unit simplex.
///
/// For a cone, projecting onto the cone and then scaling radially is the exact
/// projection onto the intersection with an origin-centred ball. With a simplex
/// domain the ball only acts on `v`.
pub fn project_dual(cone: &Cone, domain: DualDomain, ball: &DualBall, v: &mut [f64], lam: &mut [f64]) {
    match domain {
        DualDomain::Cone => {
            cone.dual().project_in_place(lam);
            ball.project(v, lam);
        }
        DualDomain::Simplex => {
            let p = project_simplex(lam, 1.0);
            lam.copy_from_slice(&p);
            match *ball {
                DualBall::Unbounded => {}
                DualBall::JointBall { radius } => scale_into_ball(v, radius),
                DualBall::SplitBall { radius_v, .. } => scale_into_ball(v, radius_v),
            }
        }
    }
}

/// Generator of a Bregman distance.
pub trait BregmanGenerator {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// `D(x, xbar) = phi(x) - phi(xbar) - <grad phi(xbar), x - xbar>`.
    fn distance(&self, x: &[f64], xbar: &[f64]) -> f64 {
        let g = self.gradient(xbar);
        self.value(x) - self.value(xbar) - dot(&g, &crate::linalg::sub(x, xbar))
    }
}

/// `phi = 0.5 ||.||^2`; its distance is `0.5 ||x - xbar||^2` and `L_phi = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Euclidean;

impl BregmanGenerator for Euclidean {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * crate::linalg::norm_sq(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn distance(&self, x: &[f64], xbar: &[f64]) -> f64 {
        0.5 * crate::linalg::dist_sq(x, xbar)
    }
}

/// Primal Bregman distance with the Euclidean generator.
pub fn bregman_p(x: &[f64], xbar: &[f64]) -> f64 {
    Euclidean.distance(x, xbar)
}

/// Dual Bregman distance with the Euclidean generator on stacked `(v, lambda)`.
pub fn bregman_d(v: &[f64], lam: &[f64], vbar: &[f64], lambar: &[f64]) -> f64 {
    Euclidean.distance(v, vbar) + Euclidean.distance(lam, lambar)
}
