//! Point samples of compact sets and disc boundaries.
//!
//! Points are exact Gaussian rationals. Circle and arc points use the rational
//! parametrization of the unit circle, so they lie exactly on their circle.

use std::collections::HashSet;
use std::f64::consts::PI;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{parse_rational, GaussRational, Mode, Scalar};

/// Default sampling density along K (points per unit length).
pub const DEFAULT_DENSITY: f64 = 40.0;
/// Default number of points on the disc boundary |z| = r.
pub const DEFAULT_DISC_POINTS: usize = 64;
/// Lower bound on the number of points generated for one segment or arc.
pub const DEFAULT_MIN_POINTS: usize = 32;

/// Real number in a config: a string (`"6/5"`, `"1.2"`) or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Number(f64),
}

impl Num {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Num::Text(s) => parse_rational(s),
            Num::Number(x) if x.is_finite() => parse_rational(&format!("{x}")),
            Num::Number(x) => Err(Error::Parse(format!("non-finite number {x}"))),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        Ok(self.to_rational()?.to_f64())
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::Number(x)
    }
}

/// Complex number in a config: a real [`Num`] or a `[re, im]` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexNum {
    Real(Num),
    Pair([Num; 2]),
}

impl ComplexNum {
    pub fn to_gauss(&self) -> Result<GaussRational> {
        match self {
            ComplexNum::Real(x) => Ok(GaussRational::real(x.to_rational()?)),
            ComplexNum::Pair([re, im]) => Ok(GaussRational::new(re.to_rational()?, im.to_rational()?)),
        }
    }
}

impl From<f64> for ComplexNum {
    fn from(x: f64) -> Self {
        ComplexNum::Real(Num::Number(x))
    }
}

fn zero_num() -> ComplexNum {
    ComplexNum::Real(Num::Number(0.0))
}

/// Building block of a compact sample description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    Segment {
        from: ComplexNum,
        to: ComplexNum,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
    },
    /// Arc of the circle |z − center| = radius between two angles (radians).
    Arc {
        #[serde(default = "zero_num")]
        center: ComplexNum,
        radius: Num,
        start: f64,
        end: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
    },
    Points { points: Vec<ComplexNum> },
}

/// Description of a compact set K by primitives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub primitives: Vec<Primitive>,
    /// Caller assertion that K has connected complement.
    #[serde(default = "default_true")]
    pub connected_complement: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_points: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl SampleSpec {
    pub fn segment(from: f64, to: f64) -> Self {
        SampleSpec {
            label: None,
            primitives: vec![Primitive::Segment { from: from.into(), to: to.into(), points: None }],
            connected_complement: true,
            density: None,
            min_points: None,
        }
    }

    pub fn with_points(mut self, n: usize) -> Self {
        for p in &mut self.primitives {
            match p {
                Primitive::Segment { points, .. } | Primitive::Arc { points, .. } => *points = Some(n),
                Primitive::Points { .. } => {}
            }
        }
        self
    }
}

/// Exact point on the unit circle near angle `theta`.
pub fn unit_point(theta: f64) -> GaussRational {
    let mut t = theta % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    if t.abs() > PI / 2.0 {
        let shifted = if t > 0.0 { t - PI } else { t + PI };
        let p = unit_point(shifted);
        return GaussRational::new(-p.re, -p.im);
    }
    let s = Rational::from_f64((t / 2.0).tan()).expect("finite tangent");
    let s2 = Rational::from(&s * &s);
    let den = Rational::from(1) + &s2;
    let re = (Rational::from(1) - s2) / &den;
    let im = Rational::from(2 * s) / den;
    GaussRational::new(re, im)
}

/// Exact point r·e^{iθ}.
fn circle_point(center: &GaussRational, radius: &Rational, theta: f64) -> GaussRational {
    let u = unit_point(theta);
    GaussRational::new(
        Rational::from(&center.re + Rational::from(radius * &u.re)),
        Rational::from(&center.im + Rational::from(radius * &u.im)),
    )
}

/// `n` points on |z| = r, closed under conjugation.
pub fn disc_grid(r: &Rational, n: usize) -> Vec<GaussRational> {
    let n = n.max(2);
    let origin = GaussRational::zero();
    let half = n / 2;
    let mut pts: Vec<GaussRational> =
        (0..=half).map(|k| circle_point(&origin, r, 2.0 * PI * k as f64 / n as f64)).collect();
    let upper = if n % 2 == 0 { half - 1 } else { half };
    for k in 1..=upper {
        let p = &pts[k];
        let c = p.conj();
        pts.push(c);
    }
    pts
}

fn length_count(length: f64, density: f64, min_points: usize) -> usize {
    ((length * density).ceil() as usize + 1).max(min_points).max(2)
}

/// Finite sample of a compact set outside the open unit disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactSample {
    pub label: String,
    points: Vec<GaussRational>,
    pub connected_complement: bool,
}

impl CompactSample {
    /// Checks non-emptiness and |z| ≥ 1 exactly.
    pub fn new(label: impl Into<String>, points: Vec<GaussRational>, connected_complement: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("compact sample is empty"));
        }
        if let Some(p) = points.iter().find(|p| p.norm_sqr() < 1) {
            return Err(Error::domain(format!("sample point {p} lies inside the unit disc")));
        }
        Ok(CompactSample { label: label.into(), points, connected_complement })
    }

    /// Generates points from a description. Points that land inside the unit disc
    /// through rounding are pushed radially out to modulus at least 1.
    pub fn from_spec(spec: &SampleSpec) -> Result<Self> {
        let density = spec.density.unwrap_or(DEFAULT_DENSITY);
        if !(density > 0.0) {
            return Err(Error::domain("sample density must be positive"));
        }
        let min_points = spec.min_points.unwrap_or(DEFAULT_MIN_POINTS);
        let mut points = Vec::new();
        for prim in &spec.primitives {
            match prim {
                Primitive::Segment { from, to, points: count } => {
                    let a = from.to_gauss()?;
                    let b = to.to_gauss()?;
                    let d = GaussRational::new(
                        Rational::from(&b.re - &a.re),
                        Rational::from(&b.im - &a.im),
                    );
                    let len = d.norm_sqr().to_f64().sqrt();
                    let n = count.unwrap_or_else(|| length_count(len, density, min_points)).max(1);
                    if n == 1 {
                        points.push(a);
                        continue;
                    }
                    for i in 0..n {
                        let t = Rational::from((i as u64, (n - 1) as u64));
                        points.push(GaussRational::new(
                            Rational::from(&a.re + Rational::from(&d.re * &t)),
                            Rational::from(&a.im + Rational::from(&d.im * &t)),
                        ));
                    }
                }
                Primitive::Arc { center, radius, start, end, points: count } => {
                    let c = center.to_gauss()?;
                    let r = radius.to_rational()?;
                    if r <= 0 {
                        return Err(Error::domain("arc radius must be positive"));
                    }
                    let len = r.to_f64() * (end - start).abs();
                    let n = count.unwrap_or_else(|| length_count(len, density, min_points)).max(1);
                    let mid = (start + end) / 2.0;
                    let half = (end - start) / 2.0;
                    for i in 0..n {
                        let s = if n == 1 { 0.0 } else { (2 * i) as f64 / (n - 1) as f64 - 1.0 };
                        let s = if n > 1 && 2 * i + 1 == n { 0.0 } else { s };
                        points.push(circle_point(&c, &r, mid + half * s));
                    }
                }
                Primitive::Points { points: list } => {
                    for p in list {
                        points.push(p.to_gauss()?);
                    }
                }
            }
        }
        let points = points.into_iter().map(push_outside_disc).collect();
        let mut seen = HashSet::new();
        let points: Vec<GaussRational> = points_dedup(points, &mut seen);
        CompactSample::new(
            spec.label.clone().unwrap_or_else(|| "K".to_string()),
            points,
            spec.connected_complement,
        )
    }

    /// Sample without the |z| ≥ 1 restriction, for grids on the real line.
    pub fn unrestricted(label: impl Into<String>, points: Vec<GaussRational>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("compact sample is empty"));
        }
        Ok(CompactSample { label: label.into(), points, connected_complement: true })
    }

    /// Real grid of `n` equispaced points on [−a, a].
    pub fn real_grid(a: &Rational, n: usize) -> Result<Self> {
        if *a <= 0 || n < 2 {
            return Err(Error::domain("real grid needs a > 0 and at least two points"));
        }
        let step = Rational::from(a * 2u32) / (n as u64 - 1);
        let points = (0..n)
            .map(|i| GaussRational::real(Rational::from(&step * i as u64) - a))
            .collect();
        CompactSample::unrestricted(format!("[-{a}, {a}]"), points)
    }

    pub fn points(&self) -> &[GaussRational] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scalars(&self, mode: Mode) -> Vec<Scalar> {
        self.points.iter().map(|p| Scalar::from_gauss(p, mode)).collect()
    }

    /// K ∪ {z}.
    pub fn with_point(&self, z: &GaussRational) -> Result<Self> {
        let mut points = self.points.clone();
        if !points.contains(z) {
            points.push(z.clone());
        }
        CompactSample::new(self.label.clone(), points, self.connected_complement)
    }

    pub fn is_conjugation_closed(&self) -> bool {
        let set: HashSet<&GaussRational> = self.points.iter().collect();
        self.points.iter().all(|p| p.is_real() || set.contains(&p.conj()))
    }

    pub fn all_real(&self) -> bool {
        self.points.iter().all(GaussRational::is_real)
    }

    pub fn max_modulus(&self, precision: u32) -> Float {
        self.points
            .iter()
            .map(|p| Float::with_val(precision, p.norm_sqr()).sqrt())
            .fold(Float::new(precision), |a, b| a.max(&b))
    }

    /// Smallest modulus among points with |z| ≥ 1 (1 if there are none).
    pub fn min_modulus_outside_disc(&self, precision: u32) -> Float {
        self.points
            .iter()
            .filter(|p| p.norm_sqr() >= 1)
            .map(|p| Float::with_val(precision, p.norm_sqr()).sqrt())
            .fold(None, |a: Option<Float>, b| Some(a.map_or(b.clone(), |a| a.min(&b))))
            .unwrap_or_else(|| Float::with_val(precision, 1))
    }

    pub fn min_modulus(&self, precision: u32) -> Float {
        self.points
            .iter()
            .map(|p| Float::with_val(precision, p.norm_sqr()).sqrt())
            .fold(Float::with_val(precision, f64::INFINITY), |a, b| a.min(&b))
    }
}

fn points_dedup(points: Vec<GaussRational>, seen: &mut HashSet<GaussRational>) -> Vec<GaussRational> {
    points.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

fn push_outside_disc(p: GaussRational) -> GaussRational {
    let n = p.norm_sqr();
    if n >= 1 || n == 0 {
        return p;
    }
    let mut factor = Rational::from_f64(1.0 / n.to_f64().sqrt()).expect("finite factor");
    let bump = Rational::from((1u64 << 40) + 1) / Rational::from(1u64 << 40);
    loop {
        let f2 = Rational::from(&factor * &factor);
        if Rational::from(&n * &f2) >= 1 {
            break;
        }
        factor *= &bump;
    }
    GaussRational::new(Rational::from(&p.re * &factor), Rational::from(&p.im * &factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_points_are_exact() {
        for k in 0..37 {
            let p = unit_point(-3.3 + 0.2 * k as f64);
            assert_eq!(p.norm_sqr(), 1);
        }
        let p = unit_point(PI);
        assert!((p.re.to_f64() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn disc_grid_is_on_circle_and_symmetric() {
        let r = Rational::from((7, 10));
        let g = disc_grid(&r, 64);
        assert_eq!(g.len(), 64);
        let r2 = Rational::from(&r * &r);
        assert!(g.iter().all(|p| p.norm_sqr() == r2));
        let set: HashSet<&GaussRational> = g.iter().collect();
        assert!(g.iter().all(|p| set.contains(&p.conj())));
        assert_eq!(set.len(), 64);
    }

    #[test]
    fn segment_sampling() {
        let k = CompactSample::from_spec(&SampleSpec::segment(1.1, 2.0).with_points(200)).unwrap();
        assert_eq!(k.len(), 200);
        assert_eq!(k.points()[0], GaussRational::real(Rational::from((11, 10))));
        assert_eq!(k.points()[199], GaussRational::real(2));
        assert!(k.all_real());
        let dense = CompactSample::from_spec(&SampleSpec::segment(1.2, 1.3)).unwrap();
        assert_eq!(dense.len(), DEFAULT_MIN_POINTS);
    }

    #[test]
    fn inner_points_are_rejected_or_pushed_out() {
        assert!(CompactSample::new("K", vec![GaussRational::real(Rational::from((1, 2)))], true).is_err());
        let spec: SampleSpec = serde_json::from_str(
            r#"{"primitives":[{"type":"arc","radius":"1","start":-0.5,"end":0.5,"points":9}]}"#,
        )
        .unwrap();
        let k = CompactSample::from_spec(&spec).unwrap();
        assert_eq!(k.len(), 9);
        assert!(k.is_conjugation_closed());
        assert!(k.points().iter().all(|p| p.norm_sqr() >= 1));
    }

    #[test]
    fn config_numbers_are_read_as_decimals() {
        let spec: SampleSpec = serde_json::from_str(
            r#"{"primitives":[{"type":"points","points":[1.2,["3/2","-1"]]}]}"#,
        )
        .unwrap();
        let k = CompactSample::from_spec(&spec).unwrap();
        assert_eq!(k.points()[0], GaussRational::real(Rational::from((6, 5))));
        assert_eq!(k.points()[1], GaussRational::new(Rational::from((3, 2)), -1));
    }
}
