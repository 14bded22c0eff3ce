//! Adaptive Gauss-Kronrod integration over the band `k in [0, pi]`.
//!
//! The band is first cut into uniform panels (enough to resolve the
//! oscillatory factor of the transport integrands), each panel is integrated
//! with a Gauss-Kronrod pair, and panels whose error estimate exceeds their
//! share of the tolerance are bisected recursively. Panels are evaluated in
//! parallel but summed in grid order, so results do not depend on the number
//! of worker threads.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature controls for band integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of leaf panels after refinement.
    pub max_panels: usize,
    /// Kronrod nodes per panel: 15, 21 or 31.
    pub nodes_per_panel: usize,
    /// Minimum number of initial panels.
    pub base_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_panels: 200_000,
            nodes_per_panel: 21,
            base_panels: 8,
        }
    }
}

impl QuadratureSpec {
    /// Initial panel count for an integrand oscillating like cos(2 g t sin^2 k):
    /// at least four panels per period.
    pub fn panels_for(&self, g: f64, t: f64) -> usize {
        let osc = (4.0 * (g * t).abs()).ceil();
        let osc = if osc.is_finite() { osc as usize } else { self.max_panels };
        self.base_panels.max(osc).max(1)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes_per_panel = nodes;
        self
    }

    fn rule(&self) -> Result<&'static KronrodRule> {
        match self.nodes_per_panel {
            15 => Ok(&GK15),
            21 => Ok(&GK21),
            31 => Ok(&GK31),
            n => Err(Error::Domain {
                name: "nodes_per_panel",
                value: n as f64,
                domain: "one of 15, 21, 31",
            }),
        }
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrates `f` over `[0, pi]` starting from `quad.base_panels` panels.
pub fn integrate_band<F>(f: F, quad: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_panels(f, 0.0, PI, quad.base_panels.max(1), quad)
}

/// Integrates `f` over `[a, b]` starting from `initial_panels` uniform panels.
pub fn integrate_panels<F>(f: F, a: f64, b: f64, initial_panels: usize, quad: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = initial_panels.max(1);
    if n > quad.max_panels {
        return Err(Error::QuadratureBudget {
            max_panels: quad.max_panels,
            achieved: f64::INFINITY,
            target: quad.abs_tol,
        });
    }
    let width = (b - a) / n as f64;
    let edges: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + width * i as f64 }).collect();
    integrate_partition(f, &edges, quad)
}

/// Integrates `f` over `[0, pi]` with `panels` initial panels, placing panel
/// edges at every interior breakpoint and spreading the rest uniformly.
pub fn integrate_band_with_breaks<F>(f: F, breaks: &[f64], panels: usize, quad: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > 0.0 && *x < PI).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut points = vec![0.0];
    points.extend(cuts);
    points.push(PI);
    let mut edges = vec![0.0];
    for w in points.windows(2) {
        let share = ((w[1] - w[0]) / PI * panels as f64).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / share as f64;
        for i in 1..share {
            edges.push(w[0] + step * i as f64);
        }
        edges.push(w[1]);
    }
    if edges.len() - 1 > quad.max_panels {
        return Err(Error::QuadratureBudget {
            max_panels: quad.max_panels,
            achieved: f64::INFINITY,
            target: quad.abs_tol,
        });
    }
    integrate_partition(f, &edges, quad)
}

/// Integrates `f` over `[edges[0], edges[last]]` starting from the given
/// increasing panel edges.
pub fn integrate_partition<F>(f: F, edges: &[f64], quad: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let rule = quad.rule()?;
    if edges.len() < 2
        || edges
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::Domain {
            name: "edges",
            value: edges.len() as f64,
            domain: "at least two strictly increasing panel edges",
        });
    }
    let n = edges.len() - 1;
    let (a, b) = (edges[0], edges[n]);

    // Coarse pass, also used to set the global tolerance.
    let coarse: Vec<Panel> = (0..n)
        .into_par_iter()
        .map(|i| rule.apply(&f, edges[i], edges[i + 1]))
        .collect();
    let total: f64 = coarse.iter().map(|p| p.value).sum();
    let scale: f64 = coarse.iter().map(|p| p.abs).sum();
    let target = quad.abs_tol.max(quad.rel_tol * total.abs());
    let floor = 50.0 * f64::EPSILON * scale;

    let budget = quad.max_panels / n;
    let refined: Vec<Leaf> = coarse
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (lo, hi) = (edges[i], edges[i + 1]);
            let local = target * (hi - lo) / (b - a);
            refine(
                &f,
                rule,
                lo,
                hi,
                p,
                local.max(floor * (hi - lo) / (b - a)),
                budget.max(1),
            )
        })
        .collect();

    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0;
    let mut exhausted = false;
    for leaf in &refined {
        value += leaf.value;
        error += leaf.error;
        panels += leaf.panels;
        exhausted |= leaf.exhausted;
    }
    if exhausted && error > target.max(floor) {
        return Err(Error::QuadratureBudget {
            max_panels: quad.max_panels,
            achieved: error,
            target,
        });
    }
    Ok(QuadResult { value, error, panels })
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    value: f64,
    error: f64,
    abs: f64,
}

#[derive(Debug, Clone, Copy)]
struct Leaf {
    value: f64,
    error: f64,
    panels: usize,
    exhausted: bool,
}

fn refine<F>(f: &F, rule: &KronrodRule, a: f64, b: f64, p: Panel, tol: f64, budget: usize) -> Leaf
where
    F: Fn(f64) -> f64,
{
    let width_ok = (b - a).abs() > 1e3 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    // bisecting cannot push the estimate below the rounding floor of the rule
    let at_floor = p.error <= 50.0 * f64::EPSILON * p.abs * (1.0 + 1e-9);
    if p.error <= tol || !width_ok || at_floor {
        return Leaf {
            value: p.value,
            error: p.error,
            panels: 1,
            exhausted: p.error > tol && !at_floor,
        };
    }
    if budget < 2 {
        return Leaf {
            value: p.value,
            error: p.error,
            panels: 1,
            exhausted: true,
        };
    }
    let mid = 0.5 * (a + b);
    let left = rule.apply(f, a, mid);
    let right = rule.apply(f, mid, b);
    let lb = budget / 2;
    let l = refine(f, rule, a, mid, left, 0.5 * tol, lb);
    let r = refine(f, rule, mid, b, right, 0.5 * tol, budget - lb);
    Leaf {
        value: l.value + r.value,
        error: l.error + r.error,
        panels: l.panels + r.panels,
        exhausted: l.exhausted || r.exhausted,
    }
}

/// A Gauss-Kronrod pair; abscissae are listed from the outermost inwards,
/// odd indices being the embedded Gauss nodes, the last entry the centre.
pub struct KronrodRule {
    xgk: &'static [f64],
    wgk: &'static [f64],
    wg: &'static [f64],
}

impl KronrodRule {
    fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Panel {
        let n = self.xgk.len();
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center);
        // Gauss rules with an odd number of points include the centre.
        let gauss_has_center = n.is_multiple_of(2);
        let mut res_g = if gauss_has_center {
            fc * self.wg[self.wg.len() - 1]
        } else {
            0.0
        };
        let mut res_k = fc * self.wgk[n - 1];
        let mut res_abs = res_k.abs();
        let mut samples = Vec::with_capacity(2 * (n - 1));
        for j in 0..n - 1 {
            let dx = half * self.xgk[j];
            let f1 = f(center - dx);
            let f2 = f(center + dx);
            res_k += self.wgk[j] * (f1 + f2);
            res_abs += self.wgk[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += self.wg[j / 2] * (f1 + f2);
            }
            samples.push((j, f1, f2));
        }
        let mean = 0.5 * res_k;
        let mut res_asc = self.wgk[n - 1] * (fc - mean).abs();
        for &(j, f1, f2) in &samples {
            res_asc += self.wgk[j] * ((f1 - mean).abs() + (f2 - mean).abs());
        }
        let h = half.abs();
        let value = res_k * half;
        let res_abs = res_abs * h;
        let res_asc = res_asc * h;
        let mut err = ((res_k - res_g) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        Panel {
            value,
            error: err,
            abs: res_abs,
        }
    }
}

#[allow(clippy::excessive_precision)]
static GK15: KronrodRule = KronrodRule {
    xgk: &[
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ],
    wgk: &[
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ],
    wg: &[
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ],
};

#[allow(clippy::excessive_precision)]
static GK21: KronrodRule = KronrodRule {
    xgk: &[
        0.995657163025808080735527280689003,
        0.973906528517171720077964012084452,
        0.930157491355708226001207180059508,
        0.865063366688984510732096688423493,
        0.780817726586416897063717578345042,
        0.679409568299024406234327365114874,
        0.562757134668604683339000099272694,
        0.433395394129247190799265943165784,
        0.294392862701460198131126603103866,
        0.148874338981631210884826001129720,
        0.000000000000000000000000000000000,
    ],
    wgk: &[
        0.011694638867371874278064396062192,
        0.032558162307964727478818972459390,
        0.054755896574351996031381300244580,
        0.075039674810919952767043140916190,
        0.093125454583697605535065465083366,
        0.109387158802297641899210590325805,
        0.123491976262065851077958109831074,
        0.134709217311473325928054001771707,
        0.142775938577060080797094273138717,
        0.147739104901338491374841515972068,
        0.149445554002916905664936468389821,
    ],
    wg: &[
        0.066671344308688137593568809893332,
        0.149451349150580593145776339657697,
        0.219086362515982043995534934228163,
        0.269266719309996355091226921569469,
        0.295524224714752870173892994651338,
    ],
};

#[allow(clippy::excessive_precision)]
static GK31: KronrodRule = KronrodRule {
    xgk: &[
        0.998002298693397060285172840152271,
        0.987992518020485428489565718586613,
        0.967739075679139134257347978784337,
        0.937273392400705904307758947710209,
        0.897264532344081900882509656454496,
        0.848206583410427216200648320774217,
        0.790418501442465932967649294817947,
        0.724417731360170047416186054613938,
        0.650996741297416970533735895313275,
        0.570972172608538847537226737253911,
        0.485081863640239680693655740232351,
        0.394151347077563369897207370981045,
        0.299180007153168812166780024266389,
        0.201194093997434522300628303394596,
        0.101142066918717499027074231447392,
        0.000000000000000000000000000000000,
    ],
    wgk: &[
        0.005377479872923348987792051430128,
        0.015007947329316122538374763075807,
        0.025460847326715320186874001019653,
        0.035346360791375846222037948478360,
        0.044589751324764876608227299373280,
        0.053481524690928087265343147239430,
        0.062009567800670640285139230960803,
        0.069854121318728258709520077099147,
        0.076849680757720378894432777482659,
        0.083080502823133021038289247286104,
        0.088564443056211770647275443693774,
        0.093126598170825321225486872747346,
        0.096642726983623678505179907627589,
        0.099173598721791959332393173484603,
        0.100769845523875595044946662617570,
        0.101330007014791549017374792767493,
    ],
    wg: &[
        0.030753241996117268354628393577204,
        0.070366047488108124709267416450667,
        0.107159220467171935011869546685869,
        0.139570677926154314447804794511028,
        0.166269205816993933553200860481209,
        0.186161000015562211026800561866423,
        0.198431485327111576456118326443839,
        0.202578241925561272880620199967519,
    ],
};
