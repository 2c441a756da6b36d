//! Symbols: complex-valued functions on the open unit disc.
//!
//! A [`Symbol`] is an immutable expression tree. Leaves are constants, the
//! oscillating family
//!
//! ```text
//! a_b(r e^{iθ}) = r^{-1} (1-r)^{-b} sin(1/(1-r))   for r ≥ 1/2,
//!               = 1                                for r < 1/2,
//! ```
//!
//! pure boundary powers `(1-r)^{-b}`, tabulated polar data and user
//! closures; inner nodes are modulus, conjugate, radial truncation, sums and
//! scalar multiples. Radial symbols additionally expose a [`RadialProfile`]
//! that the integrators use to keep `sin(1/(1-r))` factors out of the
//! Gauss rules.
//!
//! The textual form accepted by [`Symbol::parse`]:
//!
//! ```text
//! expr := const:<c> | ab:<b> | pow:<b> | table:<path>
//!       | abs(<expr>) | conj(<expr>) | trunc:<rho>(<expr>)
//!       | scale:<c>(<expr>) | sum(<expr>,<expr>)
//! c    := 1.5 | -2 | 1+2i | -0.5i | i
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::Carrier;
use crate::PolarPoint;

/// Order of the interpolation used for tabulated symbols (bilinear).
pub const TABLE_INTERPOLATION_ORDER: u32 = 1;

/// Smooth factor of a radial term, as a function of the gap `u = 1 - r`.
pub type Envelope = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// One piece of a radial symbol: `envelope(u) · carrier(1/u)` for
/// `u_lo < u ≤ u_hi`, `u = 1 - r`.
#[derive(Clone)]
pub struct RadialTerm {
    pub envelope: Envelope,
    pub carrier: Carrier,
    pub u_lo: f64,
    pub u_hi: f64,
}

impl fmt::Debug for RadialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialTerm")
            .field("carrier", &self.carrier)
            .field("u_lo", &self.u_lo)
            .field("u_hi", &self.u_hi)
            .finish()
    }
}

/// A radial symbol as a sum of [`RadialTerm`]s (ranges may overlap).
#[derive(Clone, Debug, Default)]
pub struct RadialProfile {
    pub terms: Vec<RadialTerm>,
}

impl RadialProfile {
    /// Value at radius `r`.
    pub fn eval(&self, r: f64) -> Complex64 {
        let u = 1.0 - r;
        self.terms
            .iter()
            .filter(|t| u > t.u_lo && u <= t.u_hi)
            .map(|t| (t.envelope)(u) * t.carrier.eval(1.0 / u))
            .sum()
    }

    fn map_envelopes(&self, f: impl Fn(Complex64) -> Complex64 + Send + Sync + Clone + 'static) -> Self {
        RadialProfile {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let env = t.envelope.clone();
                    let f = f.clone();
                    RadialTerm {
                        envelope: Arc::new(move |u| f(env(u))),
                        ..t.clone()
                    }
                })
                .collect(),
        }
    }

    /// Restriction to `r ≤ rho`.
    fn truncate(&self, rho: f64) -> Self {
        let cut = 1.0 - rho;
        RadialProfile {
            terms: self
                .terms
                .iter()
                .filter(|t| t.u_hi > cut)
                .map(|t| RadialTerm {
                    u_lo: t.u_lo.max(cut),
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// `|profile|`, available when the terms have disjoint ranges.
    fn modulus(&self) -> Option<Self> {
        let mut ranges: Vec<(f64, f64)> = self.terms.iter().map(|t| (t.u_lo, t.u_hi)).collect();
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        if ranges.windows(2).any(|w| w[1].0 < w[0].1) {
            return None;
        }
        Some(RadialProfile {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let env = t.envelope.clone();
                    RadialTerm {
                        envelope: Arc::new(move |u| Complex64::new(env(u).norm(), 0.0)),
                        carrier: t.carrier.modulus(),
                        u_lo: t.u_lo,
                        u_hi: t.u_hi,
                    }
                })
                .collect(),
        })
    }
}

/// Tabulated symbol on a tensor polar mesh, interpolated bilinearly and
/// clamped to the mesh outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub path: PathBuf,
    rhos: Vec<f64>,
    phis: Vec<f64>,
    /// Row-major, `values[i * phis.len() + j]` at `(rhos[i], phis[j])`.
    values: Vec<Complex64>,
}

#[derive(serde::Deserialize)]
struct TableRow {
    rho: f64,
    phi: f64,
    re: f64,
    im: f64,
}

impl SymbolTable {
    /// Reads a CSV with columns `rho, phi, re, im` covering a full tensor
    /// mesh (any row order).
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut rows = Vec::new();
        for row in reader.deserialize() {
            let row: TableRow = row?;
            rows.push(row);
        }
        Self::from_rows(path.to_path_buf(), rows.into_iter().map(|r| (r.rho, r.phi, Complex64::new(r.re, r.im))))
    }

    /// Builds a table from `(rho, phi, value)` samples of a tensor mesh.
    pub fn from_rows(path: PathBuf, rows: impl IntoIterator<Item = (f64, f64, Complex64)>) -> Result<Self> {
        let rows: Vec<_> = rows.into_iter().collect();
        let mut rhos: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut phis: Vec<f64> = rows.iter().map(|r| r.1).collect();
        rhos.sort_by(f64::total_cmp);
        rhos.dedup();
        phis.sort_by(f64::total_cmp);
        phis.dedup();
        if rhos.is_empty() {
            return Err(Error::domain(format!("table {} has no rows", path.display())));
        }
        if let Some(bad) = rhos.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::domain(format!(
                "table {} has radius {bad} outside [0, 1)",
                path.display()
            )));
        }
        if rows.len() != rhos.len() * phis.len() {
            return Err(Error::domain(format!(
                "table {} is not a tensor mesh: {} rows for {} radii × {} angles",
                path.display(),
                rows.len(),
                rhos.len(),
                phis.len()
            )));
        }
        let mut values = vec![Complex64::new(f64::NAN, 0.0); rows.len()];
        for (rho, phi, v) in rows {
            let i = rhos.partition_point(|&x| x < rho);
            let j = phis.partition_point(|&x| x < phi);
            values[i * phis.len() + j] = v;
        }
        if values.iter().any(|v| v.re.is_nan()) {
            return Err(Error::domain(format!("table {} has duplicate mesh points", path.display())));
        }
        Ok(SymbolTable {
            path,
            rhos,
            phis,
            values,
        })
    }

    pub fn is_radial(&self) -> bool {
        self.phis.len() == 1
    }

    pub fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        let (i, s) = bracket(&self.rhos, rho);
        let (j, t) = bracket(&self.phis, phi);
        let np = self.phis.len();
        let at = |a: usize, b: usize| self.values[a * np + b];
        let i1 = (i + 1).min(self.rhos.len() - 1);
        let j1 = (j + 1).min(np - 1);
        at(i, j) * ((1.0 - s) * (1.0 - t)) + at(i1, j) * (s * (1.0 - t)) + at(i, j1) * ((1.0 - s) * t) + at(i1, j1) * (s * t)
    }
}

/// Cell index and local coordinate of `x` in the sorted mesh `xs`, clamped.
fn bracket(xs: &[f64], x: f64) -> (usize, f64) {
    if xs.len() == 1 || x <= xs[0] {
        return (0, 0.0);
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return (last, 0.0);
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    (i, (x - xs[i]) / (xs[i + 1] - xs[i]))
}

/// User-supplied symbol.
pub struct CustomSymbol {
    pub name: String,
    pub radial: bool,
    pub f: Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync>,
}

/// Integrability of a symbol: `a ∈ L^q` for every `q < q_sup`.
/// `q_sup = ∞` means bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrability {
    pub q_sup: f64,
}

impl Integrability {
    pub const BOUNDED: Integrability = Integrability { q_sup: f64::INFINITY };

    pub fn is_bounded(self) -> bool {
        self.q_sup.is_infinite()
    }
}

enum Node {
    Const(Complex64),
    Ab(f64),
    Pow(f64),
    Abs(Symbol),
    Conj(Symbol),
    Trunc(f64, Symbol),
    Scale(Complex64, Symbol),
    Sum(Symbol, Symbol),
    Table(Arc<SymbolTable>),
    Custom(Arc<CustomSymbol>),
}

/// An immutable, cheaply clonable symbol.
#[derive(Clone)]
pub struct Symbol(Arc<Node>);

/// Wrappers accepted by [`Symbol::transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Modulus,
    Conjugate,
    Truncate(f64),
}

impl Symbol {
    fn node(n: Node) -> Self {
        Symbol(Arc::new(n))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// The oscillating family `a_b`, `0 < b ≤ 1/2`.
    pub fn ab(b: f64) -> Result<Self> {
        if !(b > 0.0 && b <= 0.5) {
            return Err(Error::domain(format!("ab: exponent b = {b} must lie in (0, 1/2]")));
        }
        Ok(Self::node(Node::Ab(b)))
    }

    /// `(1 - |z|)^{-b}`, `0 ≤ b < 1`.
    pub fn pow(b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&b) {
            return Err(Error::domain(format!("pow: exponent b = {b} must lie in [0, 1)")));
        }
        Ok(Self::node(Node::Pow(b)))
    }

    pub fn table(table: SymbolTable) -> Self {
        Self::node(Node::Table(Arc::new(table)))
    }

    pub fn custom(
        name: impl Into<String>,
        radial: bool,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::node(Node::Custom(Arc::new(CustomSymbol {
            name: name.into(),
            radial,
            f: Box::new(f),
        })))
    }

    pub fn modulus(&self) -> Self {
        Self::node(Node::Abs(self.clone()))
    }

    pub fn conjugate(&self) -> Self {
        Self::node(Node::Conj(self.clone()))
    }

    /// `a` on `|z| ≤ rho`, zero outside.
    pub fn truncate(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!("truncation radius {rho} must lie in (0, 1)")));
        }
        Ok(Self::node(Node::Trunc(rho, self.clone())))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::node(Node::Scale(c, self.clone()))
    }

    pub fn sum(&self, other: &Symbol) -> Self {
        Self::node(Node::Sum(self.clone(), other.clone()))
    }

    pub fn transform(&self, kind: Transform) -> Result<Self> {
        match kind {
            Transform::Modulus => Ok(self.modulus()),
            Transform::Conjugate => Ok(self.conjugate()),
            Transform::Truncate(rho) => self.truncate(rho),
        }
    }

    /// Value at `ρ e^{iφ}`; callers guarantee `0 ≤ ρ < 1`.
    pub fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Ab(b) => Complex64::new(ab_value(*b, rho), 0.0),
            Node::Pow(b) => Complex64::new((1.0 - rho).powf(-b), 0.0),
            Node::Abs(a) => Complex64::new(a.eval(rho, phi).norm(), 0.0),
            Node::Conj(a) => a.eval(rho, phi).conj(),
            Node::Trunc(r, a) => {
                if rho <= *r {
                    a.eval(rho, phi)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Node::Scale(c, a) => *c * a.eval(rho, phi),
            Node::Sum(a, b) => a.eval(rho, phi) + b.eval(rho, phi),
            Node::Table(t) => t.eval(rho, phi),
            Node::Custom(c) => (c.f)(rho, phi),
        }
    }

    pub fn eval_at(&self, p: PolarPoint) -> Result<Complex64> {
        if !(p.rho >= 0.0 && p.rho < 1.0) {
            return Err(Error::domain(format!(
                "point (rho = {}, phi = {}) is not in the open unit disc",
                p.rho, p.phi
            )));
        }
        Ok(self.eval(p.rho, p.phi))
    }

    /// Pointwise values in grid order.
    pub fn eval_grid(&self, grid: &[PolarPoint]) -> Result<Vec<Complex64>> {
        grid.iter()
            .enumerate()
            .map(|(i, p)| {
                self.eval_at(*p).map_err(|e| match e {
                    Error::Domain(msg) => Error::Domain(format!("grid point #{i}: {msg}")),
                    other => other,
                })
            })
            .collect()
    }

    pub fn is_radial(&self) -> bool {
        match &*self.0 {
            Node::Const(_) | Node::Ab(_) | Node::Pow(_) => true,
            Node::Abs(a) | Node::Conj(a) | Node::Trunc(_, a) | Node::Scale(_, a) => a.is_radial(),
            Node::Sum(a, b) => a.is_radial() && b.is_radial(),
            Node::Table(t) => t.is_radial(),
            Node::Custom(c) => c.radial,
        }
    }

    /// `true` when the symbol is real-valued by construction.
    pub fn is_real(&self) -> bool {
        match &*self.0 {
            Node::Const(c) => c.im == 0.0,
            Node::Ab(_) | Node::Pow(_) | Node::Abs(_) => true,
            Node::Conj(a) | Node::Trunc(_, a) => a.is_real(),
            Node::Scale(c, a) => c.im == 0.0 && a.is_real(),
            Node::Sum(a, b) => a.is_real() && b.is_real(),
            Node::Table(t) => t.values.iter().all(|v| v.im == 0.0),
            Node::Custom(_) => false,
        }
    }

    /// `None` when unknown (user closures).
    pub fn integrability(&self) -> Option<Integrability> {
        match &*self.0 {
            Node::Const(_) | Node::Table(_) => Some(Integrability::BOUNDED),
            Node::Ab(b) | Node::Pow(b) => Some(if *b == 0.0 {
                Integrability::BOUNDED
            } else {
                Integrability { q_sup: 1.0 / b }
            }),
            Node::Abs(a) | Node::Conj(a) | Node::Scale(_, a) => a.integrability(),
            Node::Trunc(_, a) => a.integrability().map(|_| Integrability::BOUNDED),
            Node::Sum(a, b) => {
                let (x, y) = (a.integrability()?, b.integrability()?);
                Some(Integrability {
                    q_sup: x.q_sup.min(y.q_sup),
                })
            }
            Node::Custom(_) => None,
        }
    }

    /// Radial decomposition into smooth envelopes times bounded carriers.
    /// `None` for non-radial symbols.
    pub fn radial_profile(&self) -> Option<RadialProfile> {
        if !self.is_radial() {
            return None;
        }
        Some(self.structured_profile().unwrap_or_else(|| self.sampled_profile()))
    }

    fn sampled_profile(&self) -> RadialProfile {
        let me = self.clone();
        RadialProfile {
            terms: vec![RadialTerm {
                envelope: Arc::new(move |u| me.eval(1.0 - u, 0.0)),
                carrier: Carrier::Unit,
                u_lo: 0.0,
                u_hi: 1.0,
            }],
        }
    }

    fn structured_profile(&self) -> Option<RadialProfile> {
        let unit = |env: Envelope, u_lo: f64, u_hi: f64| RadialTerm {
            envelope: env,
            carrier: Carrier::Unit,
            u_lo,
            u_hi,
        };
        match &*self.0 {
            Node::Const(c) => {
                let c = *c;
                Some(RadialProfile {
                    terms: vec![unit(Arc::new(move |_| c), 0.0, 1.0)],
                })
            }
            Node::Ab(b) => {
                let b = *b;
                Some(RadialProfile {
                    terms: vec![
                        unit(Arc::new(|_| Complex64::new(1.0, 0.0)), 0.5, 1.0),
                        RadialTerm {
                            envelope: Arc::new(move |u: f64| Complex64::new(u.powf(-b) / (1.0 - u), 0.0)),
                            carrier: Carrier::Sin,
                            u_lo: 0.0,
                            u_hi: 0.5,
                        },
                    ],
                })
            }
            Node::Pow(b) => {
                let b = *b;
                Some(RadialProfile {
                    terms: vec![unit(Arc::new(move |u: f64| Complex64::new(u.powf(-b), 0.0)), 0.0, 1.0)],
                })
            }
            Node::Abs(a) => a.structured_profile()?.modulus(),
            Node::Conj(a) => Some(a.structured_profile()?.map_envelopes(|z| z.conj())),
            Node::Trunc(rho, a) => Some(a.structured_profile()?.truncate(*rho)),
            Node::Scale(c, a) => {
                let c = *c;
                Some(a.structured_profile()?.map_envelopes(move |z| c * z))
            }
            Node::Sum(a, b) => {
                let mut p = a.structured_profile()?;
                p.terms.extend(b.structured_profile()?.terms);
                Some(p)
            }
            Node::Table(_) | Node::Custom(_) => None,
        }
    }

    /// Canonical text; parses back to an equivalent symbol. Custom symbols
    /// print as `custom:<name>`, which does not parse.
    pub fn describe(&self) -> String {
        match &*self.0 {
            Node::Const(c) => format!("const:{}", format_complex(*c)),
            Node::Ab(b) => format!("ab:{b}"),
            Node::Pow(b) => format!("pow:{b}"),
            Node::Abs(a) => format!("abs({})", a.describe()),
            Node::Conj(a) => format!("conj({})", a.describe()),
            Node::Trunc(r, a) => format!("trunc:{r}({})", a.describe()),
            Node::Scale(c, a) => format!("scale:{}({})", format_complex(*c), a.describe()),
            Node::Sum(a, b) => format!("sum({},{})", a.describe(), b.describe()),
            Node::Table(t) => format!("table:{}", t.path.display()),
            Node::Custom(c) => format!("custom:{}", c.name),
        }
    }

    /// Parses the symbol mini-language; errors carry 1-based columns.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser { src: text, pos: 0 };
        p.skip_ws();
        let s = p.expr()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.error(format!("unexpected trailing input '{}'", &text[p.pos..])));
        }
        Ok(s)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.describe())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl std::str::FromStr for Symbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Symbol::parse(s)
    }
}

/// `a_b` at radius `r`.
pub fn ab_value(b: f64, r: f64) -> f64 {
    if r < 0.5 {
        1.0
    } else {
        let u = 1.0 - r;
        u.powf(-b) * (1.0 / u).sin() / r
    }
}

fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        let column = self.src[..self.pos].chars().count() + 1;
        Error::parse(1, column, msg)
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{token}'")))
        }
    }

    /// Literal text up to the next `(`, `)`, `,` or end.
    fn literal(&mut self) -> (usize, &str) {
        let start = self.pos;
        let len = self.rest().find(['(', ')', ',']).unwrap_or(self.rest().len());
        self.pos += len;
        (start, self.src[start..start + len].trim())
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let (start, text) = self.literal();
        let text = text.to_string();
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                self.pos = start;
                self.error(format!("invalid {what} '{text}'"))
            })
    }

    fn complex(&mut self) -> Result<Complex64> {
        let (start, text) = self.literal();
        let text = text.to_string();
        parse_complex(&text).ok_or_else(|| {
            self.pos = start;
            self.error(format!("invalid complex constant '{text}'"))
        })
    }

    fn domain<T>(&mut self, start: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Domain(msg) => {
                self.pos = start;
                self.error(msg)
            }
            other => other,
        })
    }

    fn inner(&mut self) -> Result<Symbol> {
        self.expect("(")?;
        self.skip_ws();
        let s = self.expr()?;
        self.expect(")")?;
        Ok(s)
    }

    fn expr(&mut self) -> Result<Symbol> {
        let start = self.pos;
        if self.eat("const:") {
            Ok(Symbol::constant(self.complex()?))
        } else if self.eat("ab:") {
            let at = self.pos;
            let b = self.real("exponent")?;
            self.domain(at, Symbol::ab(b))
        } else if self.eat("pow:") {
            let at = self.pos;
            let b = self.real("exponent")?;
            self.domain(at, Symbol::pow(b))
        } else if self.eat("abs") {
            Ok(self.inner()?.modulus())
        } else if self.eat("conj") {
            Ok(self.inner()?.conjugate())
        } else if self.eat("trunc:") {
            let at = self.pos;
            let rho = self.real("truncation radius")?;
            let inner = self.inner()?;
            self.domain(at, inner.truncate(rho))
        } else if self.eat("scale:") {
            let c = self.complex()?;
            Ok(self.inner()?.scale(c))
        } else if self.eat("sum") {
            self.expect("(")?;
            self.skip_ws();
            let a = self.expr()?;
            self.expect(",")?;
            self.skip_ws();
            let b = self.expr()?;
            self.expect(")")?;
            Ok(a.sum(&b))
        } else if self.eat("table:") {
            let (at, path) = self.literal();
            if path.is_empty() {
                self.pos = at;
                return Err(self.error("empty table path"));
            }
            let path = PathBuf::from(path);
            let table = SymbolTable::load(&path).map_err(|e| {
                self.pos = at;
                self.error(format!("cannot load table: {e}"))
            })?;
            Ok(Symbol::table(table))
        } else {
            self.pos = start;
            Err(self.error(
                "expected one of const:, ab:, pow:, abs(, conj(, trunc:, scale:, sum(, table:",
            ))
        }
    }
}

/// Parses `x`, `yi`, `x+yi`, `x-yi`, `i`, `-i`.
pub(crate) fn parse_complex(text: &str) -> Option<Complex64> {
    let text = text.trim();
    if let Ok(x) = text.parse::<f64>() {
        return x.is_finite().then(|| Complex64::new(x, 0.0));
    }
    let body = text.strip_suffix('i')?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    (re.is_finite() && im.is_finite()).then(|| Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ab_values() {
        let a = Symbol::ab(0.25).unwrap();
        assert_eq!(a.eval(0.3, 1.0), Complex64::new(1.0, 0.0));
        let r = 1.0 - 1.0 / PI;
        assert!(a.eval(r, 0.0).norm() < 1e-14);
        let a = Symbol::ab(0.5).unwrap();
        // 1 - 2/π < 1/2 lies on the inner branch
        assert_eq!(a.eval(1.0 - 2.0 / PI, 2.0).re, 1.0);
        let r = 1.0 - 2.0 / (5.0 * PI);
        assert_relative_eq!(a.eval(r, 2.0).re, (2.5 * PI).sqrt() / r, max_relative = 1e-13);
    }

    #[test]
    fn ab_range() {
        for b in [0.0, -0.1, 0.51, f64::NAN] {
            assert!(Symbol::ab(b).is_err());
        }
        assert!(Symbol::ab(0.5).is_ok());
    }

    #[test]
    fn transforms() {
        let one = Symbol::one();
        let t = one.truncate(0.5).unwrap();
        assert_eq!(t.eval(0.6, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(t.eval(0.5, 0.0), Complex64::new(1.0, 0.0));
        assert!(one.truncate(1.0).is_err());
        assert!(one.truncate(0.0).is_err());
        let a = Symbol::ab(0.25).unwrap();
        assert_eq!(a.conjugate().eval(0.9, 0.1), a.eval(0.9, 0.1));
        let r: f64 = 0.93;
        let expected = (1.0 - r).powf(-0.25) * (1.0 / (1.0 - r)).sin().abs() / r;
        assert_relative_eq!(a.modulus().eval(r, 0.0).re, expected, max_relative = 1e-14);
        let i = Symbol::constant(Complex64::new(0.0, 1.0));
        assert_eq!(i.conjugate().eval(0.1, 0.0), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn eval_grid_reports_offending_point() {
        let a = Symbol::one();
        let grid = [PolarPoint::new(0.5, 0.0), PolarPoint::new(1.0, 0.3)];
        let err = a.eval_grid(&grid).unwrap_err().to_string();
        assert!(err.contains("#1"), "{err}");
    }

    #[test]
    fn parse_and_describe() {
        for text in [
            "const:1",
            "const:1+2i",
            "const:-0.5i",
            "ab:0.25",
            "pow:0.25",
            "abs(ab:0.25)",
            "conj(const:1-1i)",
            "trunc:0.5(const:1)",
            "scale:2(ab:0.5)",
            "sum(const:1,pow:0.25)",
        ] {
            let s = Symbol::parse(text).unwrap();
            assert_eq!(Symbol::parse(&s.describe()).unwrap().describe(), s.describe());
        }
        assert_eq!(Symbol::parse("const:i").unwrap().eval(0.0, 0.0), Complex64::new(0.0, 1.0));
        assert_eq!(Symbol::parse(" abs( ab:0.25 ) ").unwrap().describe(), "abs(ab:0.25)");
    }

    #[test]
    fn parse_errors_carry_columns() {
        let err = Symbol::parse("abs(ab:0.75)").unwrap_err();
        match err {
            Error::Parse { column, .. } => assert_eq!(column, 8),
            other => panic!("{other:?}"),
        }
        match Symbol::parse("abs(foo)").unwrap_err() {
            Error::Parse { column, .. } => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(Symbol::parse("abs(ab:0.25").is_err());
        assert!(Symbol::parse("const:1 extra").is_err());
    }

    #[test]
    fn profiles_match_pointwise_values() {
        for text in [
            "ab:0.25",
            "abs(ab:0.25)",
            "pow:0.25",
            "trunc:0.8(ab:0.5)",
            "sum(ab:0.25,const:2)",
            "scale:1+1i(conj(ab:0.25))",
        ] {
            let s = Symbol::parse(text).unwrap();
            let p = s.radial_profile().unwrap();
            for k in 0..200 {
                let r = (k as f64 + 0.5) / 200.0;
                let (x, y) = (p.eval(r), s.eval(r, 0.0));
                assert!((x - y).norm() <= 1e-12 * (1.0 + y.norm()), "{text} at {r}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn non_radial_has_no_profile() {
        let s = Symbol::custom("zbar", false, |r, p| Complex64::from_polar(r, -p));
        assert!(s.radial_profile().is_none());
        assert!(!s.sum(&Symbol::one()).is_radial());
    }

    #[test]
    fn table_bilinear_and_clamped() {
        let rows = [
            (0.0, 0.0, Complex64::new(0.0, 0.0)),
            (0.0, 1.0, Complex64::new(1.0, 0.0)),
            (0.5, 0.0, Complex64::new(2.0, 0.0)),
            (0.5, 1.0, Complex64::new(3.0, 1.0)),
        ];
        let t = SymbolTable::from_rows(PathBuf::from("mem.csv"), rows).unwrap();
        assert_relative_eq!(t.eval(0.25, 0.5).re, 1.5);
        assert_relative_eq!(t.eval(0.25, 0.5).im, 0.25);
        assert_eq!(t.eval(0.9, 5.0), Complex64::new(3.0, 1.0));
        assert!(!t.is_radial());
    }
}
