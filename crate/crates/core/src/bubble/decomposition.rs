//! Bubble-tree decomposition of a ladder `u_n`: concentration points,
//! per-member blow-ups, identity residuals, neck ledger and verdicts.

use std::f64::consts::PI;

use serde::Serialize;

use super::concentration::{detect_concentration, ConcentrationReport};
use super::extract::{extract_at_level, extract_blowup, rescaled_domain, Blowup};
use super::identities::{bubble_reference, global_norms, oscillation_residual, residuals, BubbleReference, Residuals};
use super::necks::{
    bound_diagnostics, energy_ledger, fit_lambda, neck_rows, BoundDiagnostic, EnergyLedger, NeckAnnulus, NeckFit,
    NeckKind, NeckRow, NeckStatus,
};
use crate::config::AnalysisConfig;
use crate::field::{tension_field, Field, GridSpec, ManifoldMap};
use crate::flow::{base_map, glue_sequence, RationalMap, SequenceSpec};
use crate::hopf::neck_norms;
use crate::norms::{morrey, Region};
use crate::{par, Error, Result, Vec3};

/// One member of the sequence with its tension field.
pub struct Member {
    pub n: u32,
    pub u: ManifoldMap,
    pub tau: Field<Vec3>,
}

impl Member {
    pub fn from_map(n: u32, u: ManifoldMap) -> Self {
        let tau = tension_field(&u).tau;
        Self { n, u, tau }
    }
}

/// Where the bubble profiles come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Generated from a sequence spec: profiles, scales and the limit are known.
    Spec,
    /// Field files: the limit is estimated from the last member's body and
    /// degrees from ball energies.
    Files,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractedBubble {
    pub index: usize,
    /// Concentration point the bubble belongs to.
    pub point: usize,
    /// Found by the nested pass inside another bubble's neck.
    pub nested: bool,
    pub center: [f64; 2],
    pub radius: f64,
    pub target: f64,
    pub achieved: f64,
    pub window_energy: f64,
    pub clipped: bool,
    pub degree: usize,
    /// Generator bubble matched by position (spec input only).
    pub generator: Option<usize>,
    pub generator_scale: Option<f64>,
    pub radius_over_scale: Option<f64>,
    pub neck_inner: f64,
    /// `‖τ(v)‖_{M^{1,δ}} / (r^{2−δ}‖τ(u_n)‖_{M^{1,δ}})` on the rescaled domain.
    pub tau_morrey_scaling: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberAnalysis {
    pub n: u32,
    pub grid: GridSpec,
    pub bubbles: Vec<ExtractedBubble>,
    /// `max{r_i/r_j, r_j/r_i, |x_i − x_j|/(r_i + r_j)}` per pair `i < j`.
    pub separations: Vec<((usize, usize), f64)>,
    pub residuals: Residuals,
    pub ledger: EnergyLedger,
    /// `residual_osc / Σ_i ‖∇u_n‖_{L^{2,1}(neck_i, λ_min)}`.
    pub osc_over_neck_l21: Option<f64>,
    #[serde(skip)]
    pub windows: Vec<ManifoldMap>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        if self.pass {
            format!("{}: PASS", self.name)
        } else {
            format!("{}: FAIL({})", self.name, self.threshold)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct C0Sensitivity {
    pub c0: f64,
    pub radius: f64,
    /// Radius relative to the one at the configured `C₀`.
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleDecomposition {
    pub name: String,
    pub source: Source,
    pub identity_expected: bool,
    pub config: AnalysisConfig,
    pub epsilon0_used: f64,
    pub concentration: ConcentrationReport,
    /// More concentration points than `m_cap` were found.
    pub truncated: bool,
    pub references: Vec<BubbleReference>,
    pub members: Vec<MemberAnalysis>,
    pub necks: Vec<NeckRow>,
    pub neck_fits: Vec<NeckFit>,
    pub bound_diagnostics: Vec<BoundDiagnostic>,
    pub c0_sensitivity: Vec<C0Sensitivity>,
    /// Largest `residual_osc / neck L^{2,1}` over the members.
    pub oscillation_constant: Option<f64>,
    pub separation_monotone: bool,
    pub verdicts: Vec<Verdict>,
}

impl BubbleDecomposition {
    pub fn residual_series(&self) -> Vec<&Residuals> {
        self.members.iter().map(|m| &m.residuals).collect()
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// What is known about the sequence beyond the maps themselves.
enum Truth<'a> {
    Spec(&'a SequenceSpec),
    Files,
}

/// Reference norms cached by profile and resolution.
#[derive(Default)]
struct References {
    maps: Vec<(RationalMap, u64, usize)>,
    refs: Vec<BubbleReference>,
}

impl References {
    fn get(&mut self, map: &RationalMap, pps: f64, half: f64) -> Result<usize> {
        let key = (pps * 1e6).round() as u64;
        if let Some(&(_, _, i)) = self.maps.iter().find(|(m, k, _)| m == map && *k == key) {
            return Ok(i);
        }
        let r = bubble_reference(map, pps, half)?;
        self.refs.push(r);
        let i = self.refs.len() - 1;
        self.maps.push((map.clone(), key, i));
        Ok(i)
    }
}

/// Blow-up radius of a degree-1 bubble of unit scale at the configured level.
fn unit_blowup_ratio(cfg: &AnalysisConfig) -> f64 {
    let t = cfg.target_level();
    (t / (8.0 * PI - t)).sqrt()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

struct Raw {
    blowup: Blowup,
    point: usize,
    nested: bool,
}

/// Extractions for one member: one per concentration point plus at most one
/// nested bubble found outside `B_{λ_max ρ_in}` but inside the detection ball.
fn extract_member(u: &ManifoldMap, points: &[[f64; 2]], r_min: f64, cfg: &AnalysisConfig) -> Result<Vec<Raw>> {
    let eps2 = cfg.epsilon0 * cfg.epsilon0;
    let lam_max = *cfg.lambda_ladder.last().unwrap();
    let mut out = Vec::new();
    for (p, &x) in points.iter().enumerate() {
        let b = extract_blowup(u, &Region::disk(x, r_min), cfg)?;
        let r0 = lam_max * cfg.neck_inner_factor * b.radius;
        let center = b.center;
        out.push(Raw { blowup: b, point: p, nested: false });
        if out.len() >= cfg.m_cap || r0 >= r_min {
            continue;
        }
        let ring = Region::annulus(center, r0, r_min);
        if u.energy(Some(&ring.mask(u.spec()))) > eps2 {
            let nb = extract_at_level(u, &ring, cfg.target_level(), cfg)?;
            out.push(Raw { blowup: nb, point: p, nested: true });
        }
    }
    out.truncate(cfg.m_cap);
    Ok(out)
}

fn separations(bubbles: &[ExtractedBubble]) -> Vec<((usize, usize), f64)> {
    let mut out = Vec::new();
    for i in 0..bubbles.len() {
        for j in i + 1..bubbles.len() {
            let (a, b) = (&bubbles[i], &bubbles[j]);
            let s = (a.radius / b.radius).max(b.radius / a.radius).max(dist(a.center, b.center) / (a.radius + b.radius));
            out.push(((i, j), s));
        }
    }
    out
}

fn annuli(bubbles: &[ExtractedBubble], cfg: &AnalysisConfig) -> Vec<NeckAnnulus> {
    let mut out = Vec::new();
    for (i, b) in bubbles.iter().enumerate() {
        // A nested bubble sits inside the neck of the bubble of the same point;
        // the larger one faces the body, the smaller one faces the larger.
        let outer = bubbles
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != i && o.point == b.point && o.radius > b.radius)
            .min_by(|x, y| x.1.radius.total_cmp(&y.1.radius));
        match outer {
            Some((j, o)) => out.push(NeckAnnulus {
                bubble: i,
                kind: NeckKind::BubbleBubble,
                partner: Some(j),
                center: b.center,
                r_inner: b.neck_inner,
                r_outer: o.radius,
            }),
            None => out.push(NeckAnnulus {
                bubble: i,
                kind: NeckKind::BodyBubble,
                partner: None,
                center: b.center,
                r_inner: b.neck_inner,
                r_outer: cfg.neck_eta,
            }),
        }
    }
    out
}

/// Degree of a bubble without a known profile: ball energy over `8π`.
fn degree_from_energy(u: &ManifoldMap, x: [f64; 2], r: f64) -> usize {
    let e = u.energy(Some(&Region::disk(x, r).mask(u.spec())));
    ((e / (8.0 * PI)).round() as usize).max(1)
}

fn analyze(name: String, members: &[Member], truth: Truth, identity_expected: bool, cfg: &AnalysisConfig) -> Result<BubbleDecomposition> {
    cfg.validate()?;
    if members.len() < 3 {
        return Err(Error::InvalidParameter(format!("analysis needs at least 3 sequence members, got {}", members.len())));
    }
    let maps: Vec<ManifoldMap> = members.iter().map(|m| m.u.clone()).collect();
    let concentration = detect_concentration(&maps, cfg)?;
    drop(maps);
    let truncated = concentration.points.len() > cfg.m_cap;
    let points: Vec<[f64; 2]> = concentration.points.iter().take(cfg.m_cap).map(|p| p.x).collect();
    let last = members.last().unwrap();

    // Files input: degrees from the last member, limit from its body.
    let r_min = concentration.radius_used;
    let body_limit = match truth {
        Truth::Files => {
            let spec = last.u.spec();
            let mask: Vec<bool> = (0..spec.len())
                .map(|k| {
                    let p = spec.point(k % spec.nx, k / spec.nx);
                    points.iter().all(|&x| dist(p, x) >= r_min)
                })
                .collect();
            Some(match neck_norms(&last.u, &Region::Mask(mask)) {
                Ok(v) => v,
                Err(Error::EmptyRegion) => (0.0, 0.0, 0.0),
                Err(e) => return Err(e),
            })
        }
        Truth::Spec(_) => None,
    };
    let file_degrees: Vec<usize> = points.iter().map(|&x| degree_from_energy(&last.u, x, r_min)).collect();

    // Per-member work is independent; results are assembled in order.
    let raw: Vec<Result<Vec<Raw>>> = par::map_slice(members, |m| extract_member(&m.u, &points, r_min, cfg));
    let mut refs = References::default();
    let mut out_members = Vec::new();
    let mut necks = Vec::new();
    let mut last_bubbles = Vec::new();
    for (m, raw) in members.iter().zip(raw) {
        let raw = raw?;
        let h = m.u.spec().h();
        let tau_morrey = morrey(&m.tau, 1.0, cfg.delta, &Region::All)?.value;
        let generators = match truth {
            Truth::Spec(s) => s.bubbles_at(m.n),
            Truth::Files => Vec::new(),
        };
        let mut bubbles = Vec::new();
        let mut ref_ids = Vec::new();
        let mut windows = Vec::new();
        for (index, r) in raw.into_iter().enumerate() {
            let b = r.blowup;
            let generator = generators
                .iter()
                .enumerate()
                .filter(|(_, g)| dist(g.center, b.center) < r_min)
                .min_by(|x, y| {
                    let dx = (x.1.scale.ln() - b.radius.ln()).abs() + dist(x.1.center, b.center) / x.1.scale;
                    let dy = (y.1.scale.ln() - b.radius.ln()).abs() + dist(y.1.center, b.center) / y.1.scale;
                    dx.total_cmp(&dy)
                })
                .map(|(i, _)| i);
            let (map, scale) = match generator {
                Some(i) => (generators[i].map.clone(), generators[i].scale),
                None => {
                    let d = if r.nested { 1 } else { file_degrees[r.point] };
                    (RationalMap::monomial(d), b.radius / unit_blowup_ratio(cfg))
                }
            };
            ref_ids.push(refs.get(&map, scale / h, cfg.reference_half)?);
            let tau_morrey_scaling = if tau_morrey > 0.0 {
                let v = rescaled_domain(&m.u, b.center, b.radius)?;
                let mv = morrey(&tension_field(&v).tau, 1.0, cfg.delta, &Region::All)?.value;
                Some(mv / (b.radius.powf(2.0 - cfg.delta) * tau_morrey))
            } else {
                None
            };
            bubbles.push(ExtractedBubble {
                index,
                point: r.point,
                nested: r.nested,
                center: b.center,
                radius: b.radius,
                target: b.target,
                achieved: b.achieved,
                window_energy: b.window_energy,
                clipped: b.clipped,
                degree: map.degree(),
                generator,
                generator_scale: generator.map(|_| scale),
                radius_over_scale: generator.map(|_| b.radius / scale),
                neck_inner: cfg.neck_inner_factor * b.radius,
                tau_morrey_scaling,
            });
            windows.push(b.window);
        }

        let un = global_norms(&m.u)?;
        let (limit, osc) = match truth {
            Truth::Spec(s) => {
                let u = base_map(s, *m.u.spec())?;
                (global_norms(&u)?, Some(oscillation_residual(&m.u, &s.base, &generators)))
            }
            Truth::Files => (body_limit.unwrap(), None),
        };
        let brefs: Vec<&BubbleReference> = ref_ids.iter().map(|&i| &refs.refs[i]).collect();
        let res = residuals(m.n, un, limit, &brefs, osc);

        let ann = annuli(&bubbles, cfg);
        let rows = neck_rows(&m.u, m.n, &ann, &cfg.lambda_ladder)?;
        let lam0 = cfg.lambda_ladder[0];
        let neck_l21: f64 = rows.iter().filter(|r| r.lambda == lam0 && r.status == NeckStatus::Ok).filter_map(|r| r.l21).sum();
        let osc_over_neck_l21 = osc.filter(|_| neck_l21 > 0.0).map(|o| o / neck_l21);
        let ledger = energy_ledger(&m.u, m.n, &ann);
        necks.extend(rows);
        let seps = separations(&bubbles);
        if m.n == last.n {
            last_bubbles = bubbles.clone();
        }
        out_members.push(MemberAnalysis {
            n: m.n,
            grid: *m.u.spec(),
            bubbles,
            separations: seps,
            residuals: res,
            ledger,
            osc_over_neck_l21,
            windows,
        });
    }

    // Bound diagnostics and C₀ sensitivity on the last member.
    let mut bounds = Vec::new();
    for (i, b) in last_bubbles.iter().enumerate().filter(|(_, b)| !b.nested) {
        bounds.extend(bound_diagnostics(&last.u, &last.tau, last.n, i, b.center, b.neck_inner, cfg)?);
    }
    let mut c0_sensitivity = Vec::new();
    if let Some(b) = last_bubbles.first() {
        for c0 in [2.0, 4.0, 8.0] {
            let t = cfg.epsilon0 * cfg.epsilon0 / c0;
            let e = extract_at_level(&last.u, &Region::disk(points[b.point], r_min), t, cfg)?;
            c0_sensitivity.push(C0Sensitivity { c0, radius: e.radius, relative: e.radius / b.radius });
        }
    }

    let separation_monotone = {
        let pairs = out_members.last().map_or(0, |m| m.separations.len());
        (0..pairs).all(|k| {
            let s: Vec<f64> = out_members.iter().filter_map(|m| m.separations.get(k).map(|v| v.1)).collect();
            s.len() == out_members.len() && s.windows(2).all(|w| w[1] > w[0])
        })
    };
    let oscillation_constant =
        out_members.iter().filter_map(|m| m.osc_over_neck_l21).fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))));
    let neck_fits = fit_lambda(&necks);
    let verdicts = vec![energy_verdict(&out_members, cfg)];
    Ok(BubbleDecomposition {
        name,
        source: match truth {
            Truth::Spec(_) => Source::Spec,
            Truth::Files => Source::Files,
        },
        identity_expected,
        config: cfg.clone(),
        epsilon0_used: cfg.epsilon0,
        concentration,
        truncated,
        references: refs.refs,
        members: out_members,
        necks,
        neck_fits,
        bound_diagnostics: bounds,
        c0_sensitivity,
        oscillation_constant,
        separation_monotone,
        verdicts,
    })
}

/// Residuals decrease along the ladder and the last one is at most
/// `identity_tolerance` of the bubble energy (of `8π` without bubbles).
fn energy_verdict(members: &[MemberAnalysis], cfg: &AnalysisConfig) -> Verdict {
    let r: Vec<f64> = members.iter().map(|m| m.residuals.residual_e).collect();
    let last = members.last().unwrap();
    let scale = if last.residuals.bubble_energy > 0.0 { last.residuals.bubble_energy } else { 8.0 * PI };
    let rel = r.last().unwrap() / scale;
    let decreasing = r.windows(2).all(|w| w[1] <= w[0]);
    let pass = decreasing && rel <= cfg.identity_tolerance;
    Verdict {
        name: "energy identity".into(),
        pass,
        value: rel,
        threshold: cfg.identity_tolerance,
        detail: format!(
            "final residual {:.4} = {:.2}% of bubble energy {:.4}; residuals {}decreasing",
            r.last().unwrap(),
            100.0 * rel,
            scale,
            if decreasing { "" } else { "not " }
        ),
    }
}

/// Generates every member of `spec` and analyses the ladder.
pub fn analyze_spec(spec: &SequenceSpec, cfg: &AnalysisConfig) -> Result<BubbleDecomposition> {
    spec.validate()?;
    let idx: Vec<u32> = spec.indices().collect();
    let members = par::map_slice(&idx, |&n| glue_sequence(spec, n).map(|g| Member { n, u: g.u, tau: g.tau }))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    analyze(spec.sequence.name.clone(), &members, Truth::Spec(spec), spec.sequence.identity_expected, cfg)
}

/// Analyses maps read from files, ordered by index.
pub fn analyze_maps(name: &str, members: &[Member], cfg: &AnalysisConfig) -> Result<BubbleDecomposition> {
    if members.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(Error::InvalidParameter("sequence members must have increasing indices".into()));
    }
    analyze(name.into(), members, Truth::Files, true, cfg)
}
