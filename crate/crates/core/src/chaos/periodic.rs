//! Periodic orbits: exact itinerary enumeration for piecewise-linear maps and
//! grid-plus-bisection search for everything else.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{PlMap, UpdateMap};
use crate::roots::bisect;

/// Longest period enumerated exactly; longer searches fall back to the grid.
pub const EXACT_PERIOD_LIMIT: usize = 12;

const ENDPOINT_TOLERANCE: f64 = 1e-12;
const SEGMENT_SLACK: f64 = 1e-12;
const SAME_POINT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    /// Minimal period.
    pub period: usize,
    /// Orbit points in orbit order, starting from the smallest.
    pub points: Vec<f64>,
}

impl PeriodicOrbit {
    fn from_start(map: &dyn Fn(f64) -> f64, x: f64, n: usize) -> Option<Self> {
        let mut pts = Vec::with_capacity(n + 1);
        pts.push(x);
        for i in 0..n {
            pts.push(map(pts[i]));
        }
        if (pts[n] - x).abs() > 1e-8 {
            return None;
        }
        let minimal = (1..=n)
            .find(|d| n % d == 0 && (pts[*d] - x).abs() <= SAME_POINT)
            .unwrap_or(n);
        if minimal != n {
            return None;
        }
        pts.truncate(n);
        let start = pts
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        pts.rotate_left(start);
        Some(Self {
            period: n,
            points: pts,
        })
    }

    fn same_as(&self, other: &PeriodicOrbit) -> bool {
        self.period == other.period
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| (a - b).abs() <= SAME_POINT)
    }
}

fn push_unique(out: &mut Vec<PeriodicOrbit>, o: PeriodicOrbit) {
    if !out.iter().any(|e| e.same_as(&o)) {
        out.push(o);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exact,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicOrbitSearch {
    pub mode: SearchMode,
    pub n_max: usize,
    pub orbits: Vec<PeriodicOrbit>,
}

impl PeriodicOrbitSearch {
    pub fn periods(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.orbits.iter().map(|o| o.period).collect();
        p.dedup();
        p
    }

    pub fn of_period(&self, n: usize) -> impl Iterator<Item = &PeriodicOrbit> {
        self.orbits.iter().filter(move |o| o.period == n)
    }
}

/// All periodic orbits of minimal period `1..=n_max`. Exact for
/// piecewise-linear maps up to [`EXACT_PERIOD_LIMIT`], numeric otherwise.
pub fn find_periodic_orbits(map: &UpdateMap, n_max: usize) -> PeriodicOrbitSearch {
    let exact = match map.as_pl() {
        Some(_) if n_max > EXACT_PERIOD_LIMIT => {
            log::warn!(
                "period bound {n_max} exceeds the exact limit {EXACT_PERIOD_LIMIT}; using grid search"
            );
            None
        }
        other => other,
    };
    let mut orbits = Vec::new();
    let mode = match exact {
        Some(pl) => {
            for n in 1..=n_max {
                orbits.extend(periodic_orbits_exact(pl, n));
            }
            SearchMode::Exact
        }
        None => {
            for n in 1..=n_max {
                orbits.extend(periodic_orbits_numeric(map, n, 0));
            }
            SearchMode::Numeric
        }
    };
    PeriodicOrbitSearch {
        mode,
        n_max,
        orbits,
    }
}

/// Isolated fixed points, ascending. Segments on which the map is the
/// identity contribute nothing.
pub fn fixed_points(map: &UpdateMap) -> Vec<f64> {
    let mut v: Vec<f64> = find_periodic_orbits(map, 1)
        .orbits
        .into_iter()
        .map(|o| o.points[0])
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// One period-3 orbit, if any.
pub fn find_period3(map: &UpdateMap) -> Option<PeriodicOrbit> {
    match map.as_pl() {
        Some(pl) => periodic_orbits_exact(pl, 3).into_iter().next(),
        None => periodic_orbits_numeric(map, 3, 0).into_iter().next(),
    }
}

/// Orbits of minimal period `n` by enumerating segment itineraries.
///
/// Each itinerary `s_0 ... s_{n-1}` fixes an affine composition `A x + B` on its
/// cylinder set, whose fixed point `B / (1 - A)` is kept when it lies in the
/// cylinder. Cylinders are pruned as soon as they become empty. Points on a
/// breakpoint are accepted for either neighbouring itinerary and deduplicated.
pub fn periodic_orbits_exact(pl: &PlMap, n: usize) -> Vec<PeriodicOrbit> {
    assert!(n >= 1);
    let k = pl.num_segments();
    let candidates: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|s0| {
            let mut found = Vec::new();
            let (lo, hi) = pl.segment(s0);
            descend(pl, n, 0, s0, 1.0, 0.0, lo, hi, &mut found);
            found
        })
        .collect();
    let f = |x: f64| pl.eval(x);
    let mut out = Vec::new();
    for x in candidates.into_iter().flatten() {
        if let Some(o) = PeriodicOrbit::from_start(&f, x, n) {
            push_unique(&mut out, o);
        }
    }
    out.sort_by(|a, b| a.points[0].total_cmp(&b.points[0]));
    out
}

/// `(a, b)` is the composition so far, `[lo, hi]` the cylinder, `seg` the
/// segment that the `depth`-th image lies in.
#[allow(clippy::too_many_arguments)]
fn descend(
    pl: &PlMap,
    n: usize,
    depth: usize,
    seg: usize,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    found: &mut Vec<f64>,
) {
    let (s, c) = (pl.slopes()[seg], pl.intercepts()[seg]);
    let (a, b) = (s * a, s * b + c);
    if depth + 1 == n {
        if (1.0 - a).abs() < 1e-14 {
            return;
        }
        let x = b / (1.0 - a);
        if x >= lo - SEGMENT_SLACK && x <= hi + SEGMENT_SLACK {
            found.push(x.clamp(0.0, 1.0));
        }
        return;
    }
    let (y0, y1) = (a * lo + b, a * hi + b);
    let (ylo, yhi) = (y0.min(y1), y0.max(y1));
    for next in 0..pl.num_segments() {
        let (slo, shi) = pl.segment(next);
        let ilo = ylo.max(slo - SEGMENT_SLACK);
        let ihi = yhi.min(shi + SEGMENT_SLACK);
        if ilo > ihi {
            continue;
        }
        let (nlo, nhi) = if a.abs() < 1e-300 {
            (lo, hi)
        } else {
            let (p0, p1) = ((ilo - b) / a, (ihi - b) / a);
            (p0.min(p1).max(lo), p0.max(p1).min(hi))
        };
        if nlo > nhi + SEGMENT_SLACK {
            continue;
        }
        descend(pl, n, depth + 1, next, a, b, nlo, nhi, found);
    }
}

/// Orbits of minimal period `n` from sign changes of `f^n(x) - x` on a grid,
/// refined by bisection. A `grid` of 0 picks a size that grows like `3^n`.
pub fn periodic_orbits_numeric(map: &UpdateMap, n: usize, grid: usize) -> Vec<PeriodicOrbit> {
    assert!(n >= 1);
    let grid = if grid == 0 {
        (64 * 3usize.saturating_pow(n as u32)).clamp(4096, 1 << 22)
    } else {
        grid
    };
    let g = |x: f64| map.eval_iterate(x, n) - x;
    let chunk = 4096;
    let chunks = grid.div_ceil(chunk);
    let roots: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut roots = Vec::new();
            let start = c * chunk;
            let end = ((c + 1) * chunk).min(grid);
            let at = |i: usize| i as f64 / grid as f64;
            let mut x0 = at(start);
            let mut g0 = g(x0);
            for i in start + 1..=end {
                let x1 = at(i);
                let g1 = g(x1);
                if g0 == 0.0 {
                    roots.push(x0);
                } else if g0 * g1 < 0.0 {
                    let r = bisect(g, x0, x1, 1e-15);
                    if g(r).abs() <= 1e-8 {
                        roots.push(r);
                    }
                }
                x0 = x1;
                g0 = g1;
            }
            if end == grid && g0 == 0.0 {
                roots.push(x0);
            }
            roots
        })
        .collect();
    // The ends of [0, 1] are often fixed only up to round-off, with no sign change.
    let ends = [0.0, 1.0]
        .into_iter()
        .filter(|&x| g(x).abs() <= ENDPOINT_TOLERANCE);
    let f = |x: f64| map.eval(x);
    let mut out = Vec::new();
    for x in roots.into_iter().flatten().chain(ends) {
        if let Some(o) = PeriodicOrbit::from_start(&f, x, n) {
            push_unique(&mut out, o);
        }
    }
    out.sort_by(|a, b| a.points[0].total_cmp(&b.points[0]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapKind;

    fn tent() -> UpdateMap {
        let pl = PlMap::from_nodes(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        UpdateMap::piecewise_linear(pl, MapKind::Generic)
    }

    #[test]
    fn tent_map_orbit_counts() {
        // Full tent: 2^n points of period dividing n.
        let map = tent();
        let pl = map.as_pl().unwrap();
        assert_eq!(periodic_orbits_exact(pl, 1).len(), 2);
        assert_eq!(periodic_orbits_exact(pl, 2).len(), 1);
        assert_eq!(periodic_orbits_exact(pl, 3).len(), 2);
        assert_eq!(periodic_orbits_exact(pl, 4).len(), 3);
        assert_eq!(periodic_orbits_exact(pl, 5).len(), 6);
    }

    #[test]
    fn tent_period_two_is_two_fifths() {
        let map = tent();
        let o = &periodic_orbits_exact(map.as_pl().unwrap(), 2)[0];
        assert!((o.points[0] - 0.4).abs() < 1e-15);
        assert!((o.points[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn numeric_agrees_with_exact_on_tent() {
        let map = tent();
        for n in 1..=4 {
            let e = periodic_orbits_exact(map.as_pl().unwrap(), n);
            let g = periodic_orbits_numeric(&map, n, 0);
            assert_eq!(e.len(), g.len(), "period {n}");
        }
    }

    #[test]
    fn identity_has_no_isolated_points() {
        let map = UpdateMap::piecewise_linear(PlMap::identity(), MapKind::Generic);
        assert!(fixed_points(&map).is_empty());
        assert!(find_period3(&map).is_none());
    }
}
