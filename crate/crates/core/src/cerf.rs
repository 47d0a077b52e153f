//! Cerf diagrams of PL families and the product-cobordism classification
//! of slabs.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::field::Field;
use crate::homology::betti_numbers;
use crate::rational::Rational;
use crate::simplicial::{PrismComplex, SimplicialError};

/// A PL critical vertex of one fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalVertex {
    pub vertex: u32,
    pub value: Rational,
    pub index: usize,
    /// Total reduced Betti number of the lower link (1 for a simple critical point).
    pub multiplicity: usize,
}

/// Critical vertices of the fiber at breakpoint `time_index`.
///
/// Ties in value are broken by vertex id, so plateaus carry exactly one
/// critical vertex per component.
pub fn fiber_critical_vertices(
    p: &PrismComplex,
    time_index: usize,
    field: Field,
) -> Result<Vec<CriticalVertex>, SimplicialError> {
    let len = p.times().len();
    if time_index >= len {
        return Err(SimplicialError::TimeIndexOutOfRange {
            index: time_index,
            len,
        });
    }
    let row = &p.values()[time_index];
    let below = |w: u32, v: u32| (&row[w as usize], w) < (&row[v as usize], v);
    let base = p.base();
    let mut out = Vec::new();
    for v in 0..base.n_vertices() as u32 {
        let lower: Vec<_> = base
            .link(v)
            .into_iter()
            .filter(|s| s.iter().all(|&w| below(w, v)))
            .collect();
        let (index, multiplicity) = if lower.is_empty() {
            (0, 1)
        } else {
            let mut reduced = betti_numbers(&lower, field).expect("links are closed");
            reduced[0] -= 1;
            match reduced.iter().position(|&b| b > 0) {
                Some(k) => (k + 1, reduced.iter().sum()),
                None => continue,
            }
        };
        out.push(CriticalVertex {
            vertex: v,
            value: row[v as usize].clone(),
            index,
            multiplicity,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
    Flat,
}

impl Sign {
    pub fn name(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::Flat => "flat",
        }
    }
}

/// One linear piece of a Cerf curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: (Rational, Rational),
    pub end: (Rational, Rational),
    pub index: usize,
}

/// Sign of the slope of a segment.
pub fn classify_sign(segment: &Segment) -> Sign {
    let dv = &segment.end.1 - &segment.start.1;
    if dv.is_zero() {
        Sign::Flat
    } else if dv.is_positive() == (segment.end.0 > segment.start.0) {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// A polyline of critical values with one PL index per segment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CerfCurve {
    pub points: Vec<(Rational, Rational)>,
    pub indices: Vec<usize>,
}

impl CerfCurve {
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.points.windows(2).zip(&self.indices).map(|(w, &index)| Segment {
            start: w[0].clone(),
            end: w[1].clone(),
            index,
        })
    }

    fn push(&mut self, point: (Rational, Rational), index: usize) {
        match self.points.last() {
            Some(last) if last.0 >= point.0 => {}
            Some(_) => {
                self.points.push(point);
                self.indices.push(index);
            }
            None => self.points.push(point),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Birth,
    Death,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CerfEvent {
    pub kind: EventKind,
    pub point: (Rational, Rational),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CerfDiagram {
    pub curves: Vec<CerfCurve>,
    pub events: Vec<CerfEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CerfError {
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error("critical points between breakpoints {0} and {1} cannot be matched uniquely")]
    Ambiguous(usize, usize),
    #[error("critical points between breakpoints {0} and {1} do not pair into births and deaths")]
    Unpaired(usize, usize),
}

/// Value of vertex `v` at time `times[i] + s (times[i+1] - times[i])`.
fn value_between(p: &PrismComplex, i: usize, v: u32, s: &Rational) -> Rational {
    let a = &p.values()[i][v as usize];
    let b = &p.values()[i + 1][v as usize];
    a + (b - a) * s
}

/// Where the two vertices take equal values on `[t_i, t_{i+1}]`, as a
/// fraction `s` of the interval.
fn coincidence(p: &PrismComplex, i: usize, x: u32, y: u32) -> Option<Rational> {
    let d0 = &p.values()[i][x as usize] - &p.values()[i][y as usize];
    let d1 = &p.values()[i + 1][x as usize] - &p.values()[i + 1][y as usize];
    if d0.is_zero() {
        return Some(Rational::zero());
    }
    if d1.is_zero() {
        return Some(num_traits::One::one());
    }
    if d0.is_positive() == d1.is_positive() {
        return None;
    }
    Some(&d0 / (&d0 - &d1))
}

/// Pairs leftover critical points of adjacent index that meet inside the
/// interval. Each pair is `(index k vertex, index k+1 vertex, s)`.
fn pair_up(
    p: &PrismComplex,
    i: usize,
    left: &[&CriticalVertex],
) -> Result<Vec<(u32, u32, Rational)>, CerfError> {
    let mut used = vec![false; left.len()];
    let mut pairs = Vec::new();
    for a in 0..left.len() {
        if used[a] {
            continue;
        }
        let candidates: Vec<(usize, Rational)> = (0..left.len())
            .filter(|&b| !used[b] && b != a)
            .filter(|&b| left[b].index == left[a].index + 1 || left[a].index == left[b].index + 1)
            .filter_map(|b| coincidence(p, i, left[a].vertex, left[b].vertex).map(|s| (b, s)))
            .collect();
        let b = match candidates.len() {
            0 => continue,
            1 => candidates[0].0,
            _ => return Err(CerfError::Ambiguous(i, i + 1)),
        };
        used[a] = true;
        used[b] = true;
        let s = candidates[0].1.clone();
        let (lo, hi) = if left[a].index < left[b].index { (a, b) } else { (b, a) };
        pairs.push((left[lo].vertex, left[hi].vertex, s));
    }
    if used.iter().any(|u| !u) {
        return Err(CerfError::Unpaired(i, i + 1));
    }
    Ok(pairs)
}

/// Traces the critical values of every fiber into a Cerf diagram.
///
/// Critical vertices at consecutive breakpoints are matched by vertex
/// identity, then by nearest value within the same index; leftovers must
/// pair up into births (on the right) or deaths (on the left).
pub fn trace_cerf(p: &PrismComplex, field: Field) -> Result<CerfDiagram, CerfError> {
    let times = p.times();
    let crit: Vec<Vec<CriticalVertex>> = (0..times.len())
        .map(|i| fiber_critical_vertices(p, i, field))
        .collect::<Result<_, _>>()?;
    let mut diagram = CerfDiagram::default();
    // Curve id carrying each critical vertex of the current fiber.
    let mut open: Vec<usize> = Vec::new();
    for c in &crit[0] {
        open.push(diagram.curves.len());
        let mut curve = CerfCurve::default();
        curve.push((times[0].clone(), c.value.clone()), c.index);
        diagram.curves.push(curve);
    }
    for i in 0..times.len() - 1 {
        let (cur, next) = (&crit[i], &crit[i + 1]);
        let mut matched_next: Vec<Option<usize>> = vec![None; next.len()];
        let mut matched_cur: Vec<bool> = vec![false; cur.len()];
        for (k, c) in cur.iter().enumerate() {
            if let Some(j) = next
                .iter()
                .position(|n| n.vertex == c.vertex && n.index == c.index)
            {
                matched_next[j] = Some(k);
                matched_cur[k] = true;
            }
        }
        // Proximity matching between the remaining points of equal index;
        // whatever is left on either side must be births or deaths.
        loop {
            let mut best: Option<(Rational, usize, usize)> = None;
            let mut tie = false;
            for (k, c) in cur.iter().enumerate().filter(|(k, _)| !matched_cur[*k]) {
                for (j, n) in next.iter().enumerate() {
                    if matched_next[j].is_some() || n.index != c.index {
                        continue;
                    }
                    let gap = (&n.value - &c.value).abs();
                    match &best {
                        Some((g, _, _)) if gap > *g => {}
                        Some((g, _, _)) if gap == *g => tie = true,
                        _ => {
                            best = Some((gap, k, j));
                            tie = false;
                        }
                    }
                }
            }
            let Some((_, k, j)) = best else { break };
            if tie {
                return Err(CerfError::Ambiguous(i, i + 1));
            }
            matched_next[j] = Some(k);
            matched_cur[k] = true;
        }

        let t0 = &times[i];
        let t1 = &times[i + 1];
        let at = |s: &Rational| t0 + (t1 - t0) * s;

        // Deaths among unmatched points of the current fiber.
        let dying: Vec<&CriticalVertex> = cur
            .iter()
            .enumerate()
            .filter(|(k, _)| !matched_cur[*k])
            .map(|(_, c)| c)
            .collect();
        for (lo, hi, s) in pair_up(p, i, &dying)? {
            let point = (at(&s), value_between(p, i, lo, &s));
            for v in [lo, hi] {
                let k = cur.iter().position(|c| c.vertex == v).unwrap();
                diagram.curves[open[k]].push(point.clone(), cur[k].index);
            }
            diagram.events.push(CerfEvent {
                kind: EventKind::Death,
                point,
            });
        }

        let mut next_open = vec![usize::MAX; next.len()];
        for (j, n) in next.iter().enumerate() {
            if let Some(k) = matched_next[j] {
                diagram.curves[open[k]].push((t1.clone(), n.value.clone()), cur[k].index.min(n.index));
                next_open[j] = open[k];
            }
        }

        let born: Vec<&CriticalVertex> = next
            .iter()
            .enumerate()
            .filter(|(j, _)| matched_next[*j].is_none())
            .map(|(_, n)| n)
            .collect();
        for (lo, hi, s) in pair_up(p, i, &born)? {
            let point = (at(&s), value_between(p, i, lo, &s));
            for v in [lo, hi] {
                let j = next.iter().position(|n| n.vertex == v).unwrap();
                let mut curve = CerfCurve::default();
                curve.push(point.clone(), next[j].index);
                curve.push((t1.clone(), next[j].value.clone()), next[j].index);
                next_open[j] = diagram.curves.len();
                diagram.curves.push(curve);
            }
            diagram.events.push(CerfEvent {
                kind: EventKind::Birth,
                point,
            });
        }
        open = next_open;
    }
    Ok(diagram)
}

/// Outcome of classifying the slab `F(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CobordismClass {
    NoCriticalPointsProduct,
    LeftProduct,
    RightProduct,
    Mixed,
    Unclassified,
}

impl CobordismClass {
    pub fn name(self) -> &'static str {
        match self {
            CobordismClass::NoCriticalPointsProduct => "no_critical_points_product",
            CobordismClass::LeftProduct => "left_product",
            CobordismClass::RightProduct => "right_product",
            CobordismClass::Mixed => "mixed",
            CobordismClass::Unclassified => "unclassified",
        }
    }
}

/// Why a strip could not be classified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Irregularity {
    /// A curve passes through an end of the strip.
    CriticalAtEnd { t: Rational },
    /// A birth or death event lies on the strip.
    EventOnStrip { t: Rational },
    /// A flat piece of a curve runs along the strip.
    FlatAtLevel { from: Rational, to: Rational },
    /// A curve touches the level at a local extremum.
    Tangency { t: Rational },
    /// The interval is inverted.
    BadInterval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub class: CobordismClass,
    pub irregularity: Option<Irregularity>,
    /// Crossings of the open strip as `(t, sign)`.
    pub crossings: Vec<(Rational, Sign)>,
}

impl Classification {
    fn irregular(why: Irregularity) -> Self {
        Self {
            class: CobordismClass::Unclassified,
            irregularity: Some(why),
            crossings: Vec::new(),
        }
    }
}

/// Classifies `F(a, b, c)` by the signs of the Cerf curves crossing the
/// strip `(a, b) × {c}`.
pub fn classify_cobordism(
    d: &CerfDiagram,
    a: &Rational,
    b: &Rational,
    c: &Rational,
) -> Classification {
    if a > b {
        return Classification::irregular(Irregularity::BadInterval);
    }
    for e in &d.events {
        if e.point.1 == *c && e.point.0 >= *a && e.point.0 <= *b {
            return Classification::irregular(Irregularity::EventOnStrip {
                t: e.point.0.clone(),
            });
        }
    }
    let mut crossings: BTreeSet<(Rational, Sign)> = BTreeSet::new();
    for curve in &d.curves {
        let segments: Vec<Segment> = curve.segments().collect();
        for (k, seg) in segments.iter().enumerate() {
            let (t0, v0) = &seg.start;
            let (t1, v1) = &seg.end;
            if t1 < a || t0 > b {
                continue;
            }
            let sign = classify_sign(seg);
            if sign == Sign::Flat {
                if v0 == c && t0 < b && t1 > a {
                    return Classification::irregular(Irregularity::FlatAtLevel {
                        from: t0.clone(),
                        to: t1.clone(),
                    });
                }
                continue;
            }
            let lo = v0.min(v1);
            let hi = v0.max(v1);
            if c < lo || c > hi {
                continue;
            }
            let t = t0 + (t1 - t0) * ((c - v0) / (v1 - v0));
            if t == *a || t == *b {
                return Classification::irregular(Irregularity::CriticalAtEnd { t });
            }
            if t < *a || t > *b {
                continue;
            }
            // At a joint, both adjacent segments see the crossing; only the
            // earlier one records it, after checking the sign agrees.
            if t == *t1 {
                if let Some(after) = segments.get(k + 1) {
                    if classify_sign(after) != sign {
                        return Classification::irregular(Irregularity::Tangency { t });
                    }
                }
            }
            if t == *t0 && k > 0 {
                continue;
            }
            crossings.insert((t, sign));
        }
    }
    let crossings: Vec<(Rational, Sign)> = crossings.into_iter().collect();
    let pos = crossings.iter().any(|c| c.1 == Sign::Positive);
    let neg = crossings.iter().any(|c| c.1 == Sign::Negative);
    let class = match (pos, neg) {
        (false, false) => CobordismClass::NoCriticalPointsProduct,
        (true, false) => CobordismClass::LeftProduct,
        (false, true) => CobordismClass::RightProduct,
        (true, true) => CobordismClass::Mixed,
    };
    Classification {
        class,
        irregularity: None,
        crossings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{
        cylinder_family, hat_family, wrinkled_cylinder_family, zigzag_family, WrinkleParams,
    };
    use crate::rational::{int, ratio};

    fn pts(v: &[(i64, i64, i64, i64)]) -> Vec<(Rational, Rational)> {
        v.iter()
            .map(|&(a, b, c, d)| (ratio(a, b), ratio(c, d)))
            .collect()
    }

    #[test]
    fn hat_curve_is_the_graph() {
        let p = hat_family().prism().unwrap();
        let crit = fiber_critical_vertices(&p, 1, Field::GF2).unwrap();
        assert_eq!(crit.len(), 1);
        assert_eq!(crit[0].index, 0);
        let d = trace_cerf(&p, Field::GF2).unwrap();
        assert_eq!(d.curves.len(), 1);
        assert_eq!(d.curves[0].points, pts(&[(0, 1, 0, 1), (1, 2, 1, 1), (1, 1, 0, 1)]));
        assert!(d.events.is_empty());
        let signs: Vec<Sign> = d.curves[0].segments().map(|s| classify_sign(&s)).collect();
        assert_eq!(signs, vec![Sign::Positive, Sign::Negative]);
    }

    #[test]
    fn cylinder_has_two_flat_curves() {
        let p = cylinder_family(4).unwrap().prism().unwrap();
        let crit = fiber_critical_vertices(&p, 0, Field::GF2).unwrap();
        let summary: Vec<(u32, usize)> = crit.iter().map(|c| (c.vertex, c.index)).collect();
        assert_eq!(summary, vec![(0, 1), (2, 0)]);
        let d = trace_cerf(&p, Field::GF2).unwrap();
        assert_eq!(d.curves.len(), 2);
        for c in &d.curves {
            assert!(c.segments().all(|s| classify_sign(&s) == Sign::Flat));
        }
    }

    #[test]
    fn wrinkle_lens() {
        let params = WrinkleParams::default();
        let p = wrinkled_cylinder_family(&params, 8).unwrap().prism().unwrap();
        let mid = fiber_critical_vertices(&p, 2, Field::GF2).unwrap();
        let mut found: Vec<(Rational, usize)> =
            mid.iter().map(|c| (c.value.clone(), c.index)).collect();
        found.sort();
        assert_eq!(
            found,
            vec![(int(-1), 0), (ratio(-1, 2), 0), (ratio(1, 2), 1), (int(1), 1)]
        );
        let d = trace_cerf(&p, Field::GF2).unwrap();
        assert_eq!(d.curves.len(), 4);
        let kinds: Vec<(EventKind, (Rational, Rational))> =
            d.events.iter().map(|e| (e.kind, e.point.clone())).collect();
        assert_eq!(
            kinds,
            vec![
                (EventKind::Birth, (params.p.clone(), params.m.clone())),
                (EventKind::Death, (params.q.clone(), params.m.clone())),
            ]
        );
        for e in &d.events {
            let ends = d
                .curves
                .iter()
                .flat_map(|c| [c.points.first(), c.points.last()])
                .filter(|x| *x == Some(&e.point))
                .count();
            assert_eq!(ends, 2);
        }
    }

    #[test]
    fn hat_classification_examples() {
        let p = hat_family().prism().unwrap();
        let d = trace_cerf(&p, Field::GF2).unwrap();
        let cls = |a: (i64, i64), b: (i64, i64), c: (i64, i64)| {
            classify_cobordism(&d, &ratio(a.0, a.1), &ratio(b.0, b.1), &ratio(c.0, c.1)).class
        };
        assert_eq!(cls((1, 8), (3, 8), (1, 2)), CobordismClass::LeftProduct);
        assert_eq!(cls((5, 8), (7, 8), (1, 2)), CobordismClass::RightProduct);
        assert_eq!(cls((1, 8), (7, 8), (3, 4)), CobordismClass::Mixed);
        assert_eq!(cls((1, 8), (1, 4), (3, 4)), CobordismClass::NoCriticalPointsProduct);
        assert_eq!(cls((1, 4), (3, 8), (1, 2)), CobordismClass::Unclassified);
        let peak = classify_cobordism(&d, &ratio(1, 4), &ratio(3, 4), &int(1));
        assert_eq!(peak.irregularity, Some(Irregularity::Tangency { t: ratio(1, 2) }));
    }

    #[test]
    fn flat_and_event_strips_are_refused() {
        let p = cylinder_family(4).unwrap().prism().unwrap();
        let d = trace_cerf(&p, Field::GF2).unwrap();
        let r = classify_cobordism(&d, &int(0), &int(1), &int(1));
        assert!(matches!(r.irregularity, Some(Irregularity::FlatAtLevel { .. })));
        let r = classify_cobordism(&d, &int(0), &int(1), &int(0));
        assert_eq!(r.class, CobordismClass::NoCriticalPointsProduct);

        let params = WrinkleParams::default();
        let p = wrinkled_cylinder_family(&params, 8).unwrap().prism().unwrap();
        let d = trace_cerf(&p, Field::GF2).unwrap();
        let r = classify_cobordism(&d, &int(0), &ratio(1, 2), &params.m);
        assert!(matches!(r.irregularity, Some(Irregularity::EventOnStrip { .. })));
        // Below the lens, inside (p, q).
        let r = classify_cobordism(&d, &ratio(3, 8), &ratio(5, 8), &ratio(-3, 4));
        assert_eq!(r.class, CobordismClass::NoCriticalPointsProduct);
    }

    #[test]
    fn zigzag_curve_alternates() {
        let p = zigzag_family(3).unwrap().prism().unwrap();
        let d = trace_cerf(&p, Field::GF2).unwrap();
        assert_eq!(d.curves.len(), 1);
        let signs: Vec<Sign> = d.curves[0].segments().map(|s| classify_sign(&s)).collect();
        assert_eq!(signs.len(), 6);
        assert!(signs.chunks(2).all(|w| w == [Sign::Positive, Sign::Negative]));
    }
}
