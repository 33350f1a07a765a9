//! Reflector design search: exhaustive grid sweep plus compass-style pattern
//! search refinement.
//!
//! Designs are scored on noise-free curves and every objective is oriented
//! so that larger is better. The three objectives encode informal criteria
//! (voltage span, usable range, linearity); none is a published metric.

use std::cmp::Ordering;

use crate::calibration::usable_range;
use crate::error::{Error, Result};
use crate::geometry::{MountingConfig, ReflectorProfile, SurfaceFinish};
use crate::optics::FiberSpec;
use crate::par::Execution;
use crate::sim::{AngleGrid, ResponseCurve, Sensor};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Strictly increasing sample values along one design axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(Vec<f64>);

impl Axis {
    pub fn values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("axis", "needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("axis", "values must be finite and strictly increasing"));
        }
        Ok(Self(values))
    }

    /// `count` evenly spaced values over `[lo, hi]`; `count == 1` requires `lo == hi`.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::invalid("axis", "count must be >= 1")),
            1 if lo == hi => Ok(Self(vec![lo])),
            1 => Err(Error::invalid(
                "axis",
                format!("single-point axis needs lo == hi, got [{lo}, {hi}]"),
            )),
            _ if !(hi > lo) => Err(Error::invalid("axis", format!("[{lo}, {hi}] is degenerate"))),
            _ => {
                let step = (hi - lo) / (count - 1) as f64;
                let mut v: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
                v[count - 1] = hi;
                Ok(Self(v))
            }
        }
    }

    pub fn fixed(value: f64) -> Self {
        Self(vec![value])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

/// How each candidate reflector is positioned in front of the fibre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MountPolicy {
    /// Same standoff for every design; must exceed the largest `t_max`.
    Fixed { standoff_mm: f64 },
    /// Standoff `t_max + margin` per design.
    AboveTmax { margin_mm: f64 },
}

impl Default for MountPolicy {
    fn default() -> Self {
        MountPolicy::AboveTmax {
            margin_mm: MountingConfig::DEFAULT_MARGIN_MM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub t_min_mm: f64,
    pub t_max_mm: f64,
    pub alpha_deg: f64,
    pub reflectance: f64,
}

impl Design {
    fn params(&self) -> [f64; 4] {
        [self.t_min_mm, self.t_max_mm, self.alpha_deg, self.reflectance]
    }

    fn from_params(p: &[f64]) -> Self {
        Self {
            t_min_mm: p[0],
            t_max_mm: p[1],
            alpha_deg: p[2],
            reflectance: p[3],
        }
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.params()
            .iter()
            .zip(other.params())
            .map(|(a, b)| a.total_cmp(&b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    pub t_min: Axis,
    pub t_max: Axis,
    pub alpha: Axis,
    pub reflectance: Axis,
    pub fiber: FiberSpec,
    pub mount: MountPolicy,
    /// Step of the evaluation grid, which runs from 0 to each design's alpha.
    pub angle_step_deg: f64,
    pub budget: u64,
}

impl DesignSpace {
    pub fn new(
        t_min: Axis,
        t_max: Axis,
        alpha: Axis,
        reflectance: Axis,
        fiber: FiberSpec,
        mount: MountPolicy,
    ) -> Result<Self> {
        let space = Self {
            t_min,
            t_max,
            alpha,
            reflectance,
            fiber,
            mount,
            angle_step_deg: AngleGrid::DEFAULT_STEP_DEG,
            budget: DEFAULT_BUDGET,
        };
        space.validate()?;
        Ok(space)
    }

    /// Thickness 1–2 mm start, 2–5 mm end, α 120–180°, three surfaces.
    pub fn default_grid(fiber: FiberSpec) -> Self {
        Self::new(
            Axis::values(vec![1.0, 1.5, 2.0]).unwrap(),
            Axis::values(vec![2.0, 3.0, 4.0, 5.0]).unwrap(),
            Axis::values(vec![120.0, 150.0, 180.0]).unwrap(),
            Axis::values(vec![0.60, 0.80, 0.95]).unwrap(),
            fiber,
            MountPolicy::default(),
        )
        .expect("default design space is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        if self.t_min.min() <= 0.0 {
            return Err(Error::invalid("t_min axis", "thickness must be positive"));
        }
        if self.t_min.max() > self.t_max.min() {
            return Err(Error::invalid(
                "design space",
                format!(
                    "t_min range up to {} overlaps t_max range from {}",
                    self.t_min.max(),
                    self.t_max.min()
                ),
            ));
        }
        if self.alpha.min() <= 0.0 || self.alpha.max() > 360.0 {
            return Err(Error::invalid("alpha axis", "values must lie in (0, 360]"));
        }
        if self.reflectance.min() < 0.0 || self.reflectance.max() > 1.0 {
            return Err(Error::invalid("reflectance axis", "values must lie in [0, 1]"));
        }
        if !(self.angle_step_deg > 0.0) {
            return Err(Error::invalid("angle_step_deg", "must be positive"));
        }
        match self.mount {
            MountPolicy::Fixed { standoff_mm } if !(standoff_mm > self.t_max.max()) => Err(Error::invalid(
                "standoff",
                format!("{standoff_mm} mm must exceed largest t_max {}", self.t_max.max()),
            )),
            MountPolicy::AboveTmax { margin_mm } if !(margin_mm > 0.0) => Err(Error::invalid(
                "standoff margin",
                format!("{margin_mm} must be positive"),
            )),
            _ => Ok(()),
        }
    }

    pub fn cell_count(&self) -> u128 {
        [&self.t_min, &self.t_max, &self.alpha, &self.reflectance]
            .iter()
            .map(|a| a.len() as u128)
            .product()
    }

    /// Every grid cell in lexicographic parameter order.
    pub fn cells(&self) -> Vec<Design> {
        let mut out = Vec::with_capacity(self.cell_count() as usize);
        for &t_min_mm in self.t_min.as_slice() {
            for &t_max_mm in self.t_max.as_slice() {
                for &alpha_deg in self.alpha.as_slice() {
                    for &reflectance in self.reflectance.as_slice() {
                        out.push(Design {
                            t_min_mm,
                            t_max_mm,
                            alpha_deg,
                            reflectance,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn profile(&self, design: &Design) -> Result<ReflectorProfile> {
        let surface = SurfaceFinish::new(format!("R={}", design.reflectance), design.reflectance)?;
        ReflectorProfile::linear(design.t_min_mm, design.t_max_mm, design.alpha_deg, surface)
    }

    pub fn sensor(&self, profile: &ReflectorProfile) -> Result<Sensor> {
        let standoff = match self.mount {
            MountPolicy::Fixed { standoff_mm } => standoff_mm,
            MountPolicy::AboveTmax { margin_mm } => profile.t_max() + margin_mm,
        };
        let mount = MountingConfig::new(profile, standoff, 0.0, MountingConfig::DEFAULT_BASE_RADIUS_MM)?;
        Sensor::new(self.fiber, profile.clone(), mount)
    }

    fn bounds(&self) -> ([f64; 4], [f64; 4]) {
        let axes = [&self.t_min, &self.t_max, &self.alpha, &self.reflectance];
        (axes.map(Axis::min), axes.map(Axis::max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// `v(end) - v(start)` over the angle window.
    VoltageSpan { window: (f64, f64) },
    /// Length of the usable range in degrees.
    UsableRangeLength { min_slope: f64 },
    /// Negated RMSE (V) of the best straight line over the window.
    LinearityError { window: (f64, f64) },
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::VoltageSpan { .. } => "voltage-span",
            Objective::UsableRangeLength { .. } => "usable-range",
            Objective::LinearityError { .. } => "linearity",
        }
    }

    fn window(&self) -> Option<(f64, f64)> {
        match *self {
            Objective::VoltageSpan { window } | Objective::LinearityError { window } => Some(window),
            Objective::UsableRangeLength { .. } => None,
        }
    }

    /// Scores an already simulated curve. Windows must lie inside the curve.
    pub fn score_curve(&self, curve: &ResponseCurve) -> Result<f64> {
        let (lo, hi) = curve.angle_span();
        if let Some((a, b)) = self.window() {
            if !(a < b) {
                return Err(Error::invalid("objective window", format!("[{a}, {b}] is empty")));
            }
            for q in [a, b] {
                if !(lo..=hi).contains(&q) {
                    return Err(Error::OutOfSpan {
                        what: "objective window",
                        value: q,
                        lo,
                        hi,
                    });
                }
            }
        }
        match *self {
            Objective::VoltageSpan { window: (a, b) } => Ok(curve.voltage_at(b)? - curve.voltage_at(a)?),
            Objective::UsableRangeLength { min_slope } => match usable_range(curve, min_slope) {
                Ok(r) => Ok(r.q_hi - r.q_lo),
                Err(Error::EmptyRange) => Ok(0.0),
                Err(e) => Err(e),
            },
            Objective::LinearityError { window: (a, b) } => {
                let w = curve.window(a, b)?;
                Ok(-line_fit_rmse(w.angles().zip(w.voltages())))
            }
        }
    }
}

/// RMSE of the ordinary least-squares line through `(x, y)` points.
fn line_fit_rmse(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    if pts.len() < 3 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    (ss / n).sqrt()
}

/// Scores a profile under the space's fibre and mount policy.
pub fn evaluate_profile(profile: &ReflectorProfile, space: &DesignSpace, objective: &Objective) -> Result<f64> {
    let sensor = space.sensor(profile)?;
    let (_, stop) = sensor.joint_span();
    let mut angles = AngleGrid::new(0.0, stop, space.angle_step_deg)?.values();
    if let Some((a, b)) = objective.window() {
        for q in [a, b] {
            if !(0.0..=stop).contains(&q) {
                return Err(Error::OutOfSpan {
                    what: "objective window",
                    value: q,
                    lo: 0.0,
                    hi: stop,
                });
            }
        }
        angles.extend([a, b]);
        angles.sort_by(f64::total_cmp);
        angles.dedup();
    }
    let curve = sensor.simulate(&angles, None)?;
    objective.score_curve(&curve)
}

pub fn evaluate_design(design: &Design, space: &DesignSpace, objective: &Objective) -> Result<f64> {
    evaluate_profile(&space.profile(design)?, space, objective)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDesign {
    pub design: Design,
    pub score: f64,
}

/// Descending score, ties by ascending lexicographic parameters.
pub fn rank(results: &mut [ScoredDesign]) {
    results.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.design.lex_cmp(&b.design)));
}

pub fn grid_sweep(space: &DesignSpace, objective: &Objective) -> Result<Vec<ScoredDesign>> {
    grid_sweep_with(space, objective, Execution::default())
}

/// Exhaustive sweep. The budget is checked before any evaluation; results are
/// assembled in grid order and then ranked, so the output does not depend on
/// the execution mode.
pub fn grid_sweep_with(space: &DesignSpace, objective: &Objective, exec: Execution) -> Result<Vec<ScoredDesign>> {
    space.validate()?;
    let cells = space.cell_count();
    if cells > space.budget as u128 {
        return Err(Error::Budget {
            cells,
            budget: space.budget,
        });
    }
    let designs = space.cells();
    let mut results = exec.try_map(&designs, |d| {
        evaluate_design(d, space, objective).map(|score| ScoredDesign { design: *d, score })
    })?;
    rank(&mut results);
    Ok(results)
}

/// Outcome of a pattern search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub score: f64,
    pub evaluations: usize,
}

/// Coordinate-wise compass search with step halving, maximizing `f` inside
/// the box `[lower, upper]`.
///
/// `f` returns `None` for infeasible points. The start counts as one
/// evaluation; moves are accepted only on strict improvement, so the result
/// never scores below the start. Steps begin at a quarter of each axis width
/// and stop shrinking below `1e-4` of it. Fixed axes (zero width) are skipped.
pub fn pattern_search<F>(start: &[f64], lower: &[f64], upper: &[f64], mut f: F, budget: usize) -> Result<SearchResult>
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    if start.len() != lower.len() || start.len() != upper.len() {
        return Err(Error::Arity {
            expected: start.len(),
            got: lower.len().min(upper.len()),
        });
    }
    if budget == 0 {
        return Err(Error::invalid("budget", "must be >= 1"));
    }
    let mut x = start.to_vec();
    let mut best = f(&x).ok_or_else(|| Error::invalid("start", "infeasible start point"))?;
    let mut evaluations = 1;

    let widths: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let mut steps: Vec<f64> = widths.iter().map(|w| 0.25 * w).collect();
    let min_steps: Vec<f64> = widths.iter().map(|w| 1e-4 * w).collect();
    let active = |steps: &[f64], k: usize| widths[k] > 0.0 && steps[k] >= min_steps[k];

    'search: while (0..x.len()).any(|k| active(&steps, k)) {
        let mut improved = false;
        for k in 0..x.len() {
            if !active(&steps, k) {
                continue;
            }
            for dir in [1.0, -1.0] {
                let trial = (x[k] + dir * steps[k]).clamp(lower[k], upper[k]);
                if trial == x[k] {
                    continue;
                }
                if evaluations >= budget {
                    break 'search;
                }
                let mut cand = x.clone();
                cand[k] = trial;
                evaluations += 1;
                if let Some(score) = f(&cand) {
                    if score > best {
                        x = cand;
                        best = score;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    Ok(SearchResult {
        point: x,
        score: best,
        evaluations,
    })
}

/// Local refinement of `start` within the space bounds. Designs with
/// `t_min > t_max` or failing evaluation count as infeasible.
pub fn refine_local(start: &Design, space: &DesignSpace, objective: &Objective, budget: usize) -> Result<ScoredDesign> {
    let start_score = evaluate_design(start, space, objective)?;
    let (lower, upper) = space.bounds();
    let mut first = true;
    let result = pattern_search(
        &start.params(),
        &lower,
        &upper,
        |p| {
            if std::mem::take(&mut first) {
                return Some(start_score);
            }
            let d = Design::from_params(p);
            if d.t_min_mm > d.t_max_mm {
                return None;
            }
            evaluate_design(&d, space, objective).ok()
        },
        budget,
    )?;
    Ok(ScoredDesign {
        design: Design::from_params(&result.point),
        score: result.score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_1x1() -> DesignSpace {
        DesignSpace::new(
            Axis::fixed(1.0),
            Axis::fixed(5.0),
            Axis::fixed(120.0),
            Axis::fixed(0.95),
            FiberSpec::default(),
            MountPolicy::default(),
        )
        .unwrap()
    }

    const SPAN: Objective = Objective::VoltageSpan { window: (0.0, 120.0) };

    #[test]
    fn axis_construction() {
        assert_eq!(Axis::linspace(2.0, 5.0, 4).unwrap().as_slice(), &[2.0, 3.0, 4.0, 5.0]);
        assert_eq!(Axis::linspace(3.0, 3.0, 1).unwrap().as_slice(), &[3.0]);
        assert!(Axis::linspace(3.0, 4.0, 1).is_err());
        assert!(Axis::linspace(3.0, 3.0, 2).is_err());
        assert!(Axis::values(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn space_validation() {
        let f = FiberSpec::default();
        let overlap = DesignSpace::new(
            Axis::values(vec![1.0, 3.0]).unwrap(),
            Axis::values(vec![2.0, 5.0]).unwrap(),
            Axis::fixed(120.0),
            Axis::fixed(0.9),
            f,
            MountPolicy::default(),
        );
        assert!(overlap.is_err());
        let tight = DesignSpace::new(
            Axis::fixed(1.0),
            Axis::values(vec![2.0, 5.0]).unwrap(),
            Axis::fixed(120.0),
            Axis::fixed(0.9),
            f,
            MountPolicy::Fixed { standoff_mm: 5.0 },
        );
        assert!(tight.is_err());
    }

    #[test]
    fn constant_profile_has_zero_span() {
        let space = space_1x1();
        let flat = ReflectorProfile::table(vec![(0.0, 2.0), (120.0, 2.0)], SurfaceFinish::silver_tape()).unwrap();
        assert_eq!(evaluate_profile(&flat, &space, &SPAN).unwrap(), 0.0);
    }

    #[test]
    fn thicker_variation_scores_higher_span() {
        let space = space_1x1();
        let big = ReflectorProfile::linear(1.0, 5.0, 120.0, SurfaceFinish::silver_tape()).unwrap();
        let small = ReflectorProfile::linear(1.0, 2.0, 120.0, SurfaceFinish::silver_tape()).unwrap();
        assert!(evaluate_profile(&big, &space, &SPAN).unwrap() > evaluate_profile(&small, &space, &SPAN).unwrap());
    }

    #[test]
    fn linear_curve_has_perfect_linearity() {
        let c = ResponseCurve::from_pairs((0..=120).map(|q| (q as f64, 0.5 + 0.02 * q as f64))).unwrap();
        let score = Objective::LinearityError { window: (0.0, 120.0) }
            .score_curve(&c)
            .unwrap();
        assert!(score.abs() < 1e-12);
        let bent = ResponseCurve::from_pairs((0..=120).map(|q| (q as f64, (q as f64 / 40.0).exp()))).unwrap();
        assert!(
            Objective::LinearityError { window: (0.0, 120.0) }
                .score_curve(&bent)
                .unwrap()
                < -0.1
        );
    }

    #[test]
    fn window_outside_span_is_rejected() {
        let space = space_1x1();
        let err = evaluate_design(
            &space.cells()[0],
            &space,
            &Objective::VoltageSpan { window: (0.0, 150.0) },
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfSpan { .. }));
    }

    #[test]
    fn degenerate_sweep_matches_evaluate() {
        let space = space_1x1();
        let res = grid_sweep(&space, &SPAN).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].score, evaluate_design(&res[0].design, &space, &SPAN).unwrap());
    }

    #[test]
    fn t_max_axis_ranks_descending() {
        let mut space = space_1x1();
        space.t_max = Axis::values(vec![2.0, 3.0, 4.0, 5.0]).unwrap();
        let res = grid_sweep(&space, &SPAN).unwrap();
        let order: Vec<f64> = res.iter().map(|r| r.design.t_max_mm).collect();
        assert_eq!(order, vec![5.0, 4.0, 3.0, 2.0]);
        assert!(res.windows(2).all(|w| w[0].score > w[1].score));
    }

    #[test]
    fn budget_checked_before_evaluation() {
        let mut space = DesignSpace::default_grid(FiberSpec::default());
        space.budget = 10;
        assert!(matches!(
            grid_sweep(&space, &SPAN),
            Err(Error::Budget { cells: 108, budget: 10 })
        ));
    }

    #[test]
    fn sequential_and_parallel_rankings_agree() {
        let space = DesignSpace::default_grid(FiberSpec::default());
        let obj = Objective::UsableRangeLength { min_slope: 0.01 };
        let a = grid_sweep_with(&space, &obj, Execution::Sequential).unwrap();
        let b = grid_sweep_with(&space, &obj, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ties_break_lexicographically() {
        let d = |t: f64| Design {
            t_min_mm: t,
            t_max_mm: 5.0,
            alpha_deg: 120.0,
            reflectance: 0.9,
        };
        let mut v = vec![
            ScoredDesign {
                design: d(1.5),
                score: 1.0,
            },
            ScoredDesign {
                design: d(1.0),
                score: 1.0,
            },
            ScoredDesign {
                design: d(2.0),
                score: 2.0,
            },
        ];
        rank(&mut v);
        let order: Vec<f64> = v.iter().map(|s| s.design.t_min_mm).collect();
        assert_eq!(order, vec![2.0, 1.0, 1.5]);
    }

    #[test]
    fn budget_one_returns_start() {
        let space = DesignSpace::default_grid(FiberSpec::default());
        let start = space.cells()[5];
        let r = refine_local(&start, &space, &SPAN, 1).unwrap();
        assert_eq!(r.design, start);
        assert_eq!(r.score, evaluate_design(&start, &space, &SPAN).unwrap());
    }

    #[test]
    fn refine_does_not_worsen_grid_optimum() {
        let space = DesignSpace::default_grid(FiberSpec::default());
        let obj = Objective::UsableRangeLength { min_slope: 0.01 };
        let best = grid_sweep(&space, &obj).unwrap()[0];
        let r = refine_local(&best.design, &space, &obj, 60).unwrap();
        assert!(r.score >= best.score);
    }

    #[test]
    fn pattern_search_finds_quadratic_maximum() {
        let target = [1.37, 3.9, 151.0, 0.72];
        let lower = [1.0, 2.0, 120.0, 0.6];
        let upper = [2.0, 5.0, 180.0, 0.95];
        let f = |p: &[f64]| {
            Some(
                -p.iter()
                    .zip(&target)
                    .zip(lower.iter().zip(&upper))
                    .map(|((x, t), (l, u))| ((x - t) / (u - l)).powi(2))
                    .sum::<f64>(),
            )
        };
        let r = pattern_search(&lower, &lower, &upper, f, 200).unwrap();
        assert!(r.evaluations <= 200);
        for k in 0..4 {
            let tol = 0.01 * (upper[k] - lower[k]);
            assert!(
                (r.point[k] - target[k]).abs() <= tol,
                "axis {k}: {} vs {}",
                r.point[k],
                target[k]
            );
        }
    }
}
