//! Hölder potentials on `T^d`: a small expression language, Birkhoff sums,
//! variation and seminorm estimators, and the geometric potential `φ^u`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mane::{estimate_unstable_direction, DAMap, MapKind, DEFAULT_N_BACK, MAX_DIM};
use crate::torus::{self, dist};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Dist(Vec<f64>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Node::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Abs => v.abs(),
                    Func::Sqrt => v.sqrt(),
                }
            }
            Node::Dist(p) => dist(&x[..p.len()], p),
        }
    }

    fn uses_vars(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(_) | Node::Dist(_) => true,
            Node::Neg(a) | Node::Call(_, a) => a.uses_vars(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses_vars() || b.uses_vars()
            }
        }
    }
}

/// Parsed expression over the coordinates `x1..xd` (also `x`, `y`, `z`).
///
/// Grammar: `+ - * / ^`, parentheses, numbers, `pi`, `sin cos exp log abs
/// sqrt`, and `dist(a1, …, ad)` for the flat distance to a constant point.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    src: String,
    root: Node,
    dim: usize,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Expression { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| Error::Expression { pos: start, msg: format!("bad number '{text}'") })
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" | "ln" => Some(Func::Log),
            "abs" => Some(Func::Abs),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat(b'(') {
                return Err(self.err(format!("expected '(' after {name}")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(Node::Call(f, Box::new(arg)));
        }
        if name == "dist" {
            if !self.eat(b'(') {
                return Err(self.err("expected '(' after dist"));
            }
            let mut point = Vec::new();
            loop {
                let at = self.pos;
                let e = self.expr()?;
                if e.uses_vars() {
                    return Err(Error::Expression { pos: at, msg: "dist arguments must be constants".into() });
                }
                point.push(e.eval(&[]));
                if self.eat(b',') {
                    continue;
                }
                if self.eat(b')') {
                    break;
                }
                return Err(self.err("expected ',' or ')'"));
            }
            if point.len() != self.dim {
                return Err(Error::Expression {
                    pos: start,
                    msg: format!("dist needs {} coordinates, got {}", self.dim, point.len()),
                });
            }
            return Ok(Node::Dist(point));
        }
        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        let idx = match name {
            "x" => Some(0),
            "y" => Some(1),
            "z" => Some(2),
            _ => name.strip_prefix('x').and_then(|n| n.parse::<usize>().ok()).filter(|&k| k >= 1).map(|k| k - 1),
        };
        match idx {
            Some(i) if i < self.dim => Ok(Node::Var(i)),
            Some(i) => Err(Error::Expression {
                pos: start,
                msg: format!("coordinate {} out of range for dimension {}", i + 1, self.dim),
            }),
            None => Err(Error::Expression { pos: start, msg: format!("unknown identifier '{name}'") }),
        }
    }
}

impl Expr {
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, dim };
        let root = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(Expr { src: src.to_string(), root, dim })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.root.eval(x)
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn is_constant(&self) -> bool {
        !self.root.uses_vars()
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Source {
    Expression(Expr),
    Constant(f64),
    /// `-log ‖Dg v‖` with `v` the estimated unstable direction.
    Geometric {
        map: Arc<DAMap>,
        n_back: usize,
    },
    Custom(ScalarFn),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Expression(e) => write!(f, "Expression({:?})", e.source()),
            Source::Constant(c) => write!(f, "Constant({c})"),
            Source::Geometric { n_back, .. } => write!(f, "Geometric {{ n_back: {n_back} }}"),
            Source::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `scale · raw(x) + shift` with Hölder metadata.
#[derive(Debug, Clone)]
pub struct Potential {
    pub source: Source,
    pub dim: usize,
    pub scale: f64,
    pub shift: f64,
    pub alpha: f64,
    seminorm: Arc<OnceLock<f64>>,
}

/// Global and local extrema with the Hölder-certified grid error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialStats {
    pub alpha: f64,
    pub seminorm_est: f64,
    pub sup_global: f64,
    pub inf_global: f64,
    pub sup_ball_q: f64,
    /// Bound on `sup - max(samples)` implied by the seminorm and grid spacing.
    pub certified_error: f64,
}

impl PotentialStats {
    pub fn range(&self) -> f64 {
        self.sup_global - self.inf_global
    }
}

impl Potential {
    fn with_source(source: Source, dim: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(domain("alpha", format!("{alpha} not in (0,1]")));
        }
        Ok(Potential { source, dim, scale: 1.0, shift: 0.0, alpha, seminorm: Arc::new(OnceLock::new()) })
    }

    pub fn expression(src: &str, dim: usize, alpha: f64) -> Result<Self> {
        let e = Expr::parse(src, dim)?;
        if e.is_constant() {
            let c = e.eval(&[]);
            let mut p = Self::with_source(Source::Constant(c), dim, alpha)?;
            p.source = Source::Expression(e);
            return Ok(p);
        }
        Self::with_source(Source::Expression(e), dim, alpha)
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        Self::with_source(Source::Constant(c), dim, 1.0).unwrap()
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(0.0, dim)
    }

    pub fn custom(f: ScalarFn, dim: usize, alpha: f64) -> Result<Self> {
        Self::with_source(Source::Custom(f), dim, alpha)
    }

    pub fn geometric(map: &DAMap, n_back: usize) -> Self {
        Self::with_source(Source::Geometric { map: Arc::new(map.clone()), n_back }, map.dim(), 1.0).unwrap()
    }

    /// `t φ`.
    pub fn scaled(&self, t: f64) -> Self {
        Potential { scale: self.scale * t, shift: self.shift * t, seminorm: Arc::new(OnceLock::new()), ..self.clone() }
    }

    /// `φ + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Potential { shift: self.shift + c, ..self.clone() }
    }

    /// Constant value if the potential is known to be constant.
    pub fn constant_value(&self) -> Option<f64> {
        let raw = match &self.source {
            Source::Constant(c) => Some(*c),
            Source::Expression(e) if e.is_constant() => Some(e.eval(&[])),
            Source::Geometric { map, .. } if map.is_linear() => Some(-map.base.spectral.lambda_u.ln()),
            _ => None,
        };
        raw.map(|r| self.scale * r + self.shift)
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self.source, Source::Geometric { .. })
    }

    fn raw(&self, x: &[f64]) -> f64 {
        match &self.source {
            Source::Expression(e) => e.eval(x),
            Source::Constant(c) => *c,
            Source::Custom(f) => f(x),
            Source::Geometric { map, n_back } => {
                let d = map.dim();
                let mut xr = [0.0; MAX_DIM];
                for i in 0..d {
                    xr[i] = torus::frac(x[i]);
                }
                if map.is_linear() {
                    return -map.base.spectral.lambda_u.ln();
                }
                match estimate_unstable_direction(map, &xr[..d], *n_back) {
                    Ok(v) => {
                        let mut w = [0.0; MAX_DIM];
                        map.jvp(&xr[..d], &v, &mut w[..d]);
                        -w[..d].iter().map(|a| a * a).sum::<f64>().sqrt().ln()
                    }
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    /// `φ(x)`; expression potentials are evaluated on the given lift.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.raw(x) + self.shift
    }

    /// `φ(g^k x)` for `k < n`. Geometric potentials propagate the unstable
    /// direction along the orbit instead of re-estimating it at every point.
    pub fn orbit_values(&self, map: &DAMap, x: &[f64], n: usize) -> Vec<f64> {
        let d = map.dim();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        if let Some(c) = self.constant_value() {
            out.resize(n, c);
            return out;
        }
        let mut cur = [0.0; MAX_DIM];
        let mut next = [0.0; MAX_DIM];
        cur[..d].copy_from_slice(x);
        if let Source::Geometric { n_back, .. } = &self.source {
            let mut v = match estimate_unstable_direction(map, x, *n_back) {
                Ok(v) => v,
                Err(_) => return vec![f64::NAN; n],
            };
            let mut w = vec![0.0; d];
            for k in 0..n {
                map.jvp(&cur[..d], &v, &mut w);
                let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
                out.push(self.scale * -nw.ln() + self.shift);
                for (vi, wi) in v.iter_mut().zip(&w) {
                    *vi = wi / nw;
                }
                if k + 1 < n {
                    map.eval_into(&cur[..d], &mut next[..d]);
                    std::mem::swap(&mut cur, &mut next);
                }
            }
            return out;
        }
        for k in 0..n {
            out.push(self.eval(&cur[..d]));
            if k + 1 < n {
                map.eval_into(&cur[..d], &mut next[..d]);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        out
    }

    /// Estimated `|φ|_α`, cached.
    pub fn seminorm_est(&self) -> f64 {
        *self.seminorm.get_or_init(|| {
            if self.constant_value().is_some() {
                return 0.0;
            }
            let n_pairs = if self.is_geometric() { 4_000 } else { 20_000 };
            holder_seminorm(&|x: &[f64]| self.eval(x), self.dim, self.alpha, n_pairs, 0x5e_41)
        })
    }

    /// Extrema on `T^d` and on `B(q, ρ)`.
    pub fn stats(&self, q: &[f64], rho: f64) -> PotentialStats {
        let seminorm = self.seminorm_est();
        if let Some(c) = self.constant_value() {
            return PotentialStats {
                alpha: self.alpha,
                seminorm_est: 0.0,
                sup_global: c,
                inf_global: c,
                sup_ball_q: c,
                certified_error: 0.0,
            };
        }
        let d = self.dim;
        let per_axis: usize = match d {
            0..=2 => 256,
            3 => {
                if self.is_geometric() {
                    24
                } else {
                    48
                }
            }
            _ => 10,
        };
        let h = 1.0 / per_axis as f64;
        let total = per_axis.pow(d as u32);
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(total + 4096);
        for idx in 0..total {
            let mut k = idx;
            let mut x = vec![0.0; d];
            for xi in x.iter_mut() {
                *xi = (k % per_axis) as f64 * h;
                k /= per_axis;
            }
            pts.push(x);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x57a7);
        if let Source::Geometric { map, .. } = &self.source {
            if let MapKind::Mane(m) = &map.kind {
                // The geometric potential only deviates near the deformation and its images.
                let ec = &m.eig.vectors[d - 2];
                for _ in 0..4000 {
                    let c = rng.gen_range(-m.r_c..m.r_c);
                    let mut x: Vec<f64> = (0..d)
                        .map(|i| torus::frac(m.params.q[i] + c * ec[i] + rng.gen_range(-0.5..0.5) * m.r_t * 0.3))
                        .collect();
                    for _ in 0..rng.gen_range(0..4) {
                        let mut y = vec![0.0; d];
                        map.eval_into(&x, &mut y);
                        x = y;
                    }
                    pts.push(x);
                }
            }
        }
        let vals: Vec<f64> = pts.iter().map(|x| self.eval(x)).collect();
        let refine = |start: &[f64], sign: f64, radius: f64, center: Option<(&[f64], f64)>| -> f64 {
            let mut x = start.to_vec();
            let mut best = sign * self.eval(&x);
            let mut step = radius;
            for _ in 0..60 {
                let mut improved = false;
                for i in 0..d {
                    for dir in [-1.0, 1.0] {
                        let mut y = x.clone();
                        y[i] += dir * step;
                        if let Some((q, r)) = center {
                            if dist(&y, q) >= r {
                                continue;
                            }
                        }
                        let v = sign * self.eval(&y);
                        if v > best {
                            best = v;
                            x = y;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                    if step < 1e-12 {
                        break;
                    }
                }
            }
            sign * best
        };
        let top = |sign: f64, filter: &dyn Fn(&[f64]) -> bool| -> Vec<usize> {
            let mut idx: Vec<usize> = (0..pts.len()).filter(|&i| filter(&pts[i])).collect();
            idx.sort_by(|&a, &b| (sign * vals[b]).partial_cmp(&(sign * vals[a])).unwrap());
            idx.truncate(8);
            idx
        };
        let all = |_: &[f64]| true;
        let mut sup = f64::NEG_INFINITY;
        for i in top(1.0, &all) {
            sup = sup.max(vals[i]).max(refine(&pts[i], 1.0, h, None));
        }
        let mut inf = f64::INFINITY;
        for i in top(-1.0, &all) {
            inf = inf.min(vals[i]).min(refine(&pts[i], -1.0, h, None));
        }
        // Ball: dedicated samples inside B(q, ρ) plus grid points that fall in it.
        let mut ball_sup = f64::NEG_INFINITY;
        let mut ball_pts = Vec::new();
        for _ in 0..4000 {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-rho..rho)).collect();
            if v.iter().map(|a| a * a).sum::<f64>() < rho * rho {
                ball_pts.push(q.iter().zip(&v).map(|(a, b)| torus::frac(a + b)).collect::<Vec<f64>>());
            }
        }
        for k in 0..2000 {
            let dir = random_direction(&mut rng, d, k);
            ball_pts.push(q.iter().zip(&dir).map(|(a, b)| torus::frac(a + rho * (1.0 - 1e-9) * b)).collect());
        }
        ball_pts.push(q.to_vec());
        let mut ball_vals: Vec<(f64, usize)> = ball_pts.iter().enumerate().map(|(i, x)| (self.eval(x), i)).collect();
        ball_vals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for &(v, i) in ball_vals.iter().take(8) {
            ball_sup = ball_sup.max(v).max(refine(&ball_pts[i], 1.0, rho * 0.05, Some((q, rho))));
        }
        for (x, &v) in pts.iter().zip(&vals) {
            if dist(x, q) < rho {
                ball_sup = ball_sup.max(v);
            }
        }
        let certified_error = seminorm * (0.5 * h * (d as f64).sqrt()).powf(self.alpha);
        PotentialStats {
            alpha: self.alpha,
            seminorm_est: seminorm,
            sup_global: sup.max(ball_sup),
            inf_global: inf,
            sup_ball_q: ball_sup,
            certified_error,
        }
    }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// `S_n φ(x) = Σ_{k<n} φ(g^k x)`.
pub fn birkhoff_sum(map: &DAMap, phi: &Potential, x: &[f64], n: usize) -> f64 {
    let mut k = Kahan::default();
    for v in phi.orbit_values(map, x, n) {
        k.add(v);
    }
    k.value()
}

/// Sampled `Var(φ, η)` with the a-priori bound `|φ|_α η^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub value: f64,
    pub bound: f64,
    pub pairs: usize,
}

pub fn variation(phi: &Potential, eta: f64, n_pairs: usize, seed: u64) -> Result<VariationReport> {
    if !(eta > 0.0) {
        return Err(domain("eta", "must be positive"));
    }
    let d = phi.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let r_max = eta.min(0.5);
    for k in 0..n_pairs {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let dir = random_direction(&mut rng, d, k);
        let r = r_max * (1.0 - 1e-9) * rng.gen::<f64>().powf(0.25);
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + r * b).collect();
        best = best.max((phi.eval(&x) - phi.eval(&y)).abs());
    }
    Ok(VariationReport { value: best, bound: phi.seminorm_est() * eta.powf(phi.alpha), pairs: n_pairs })
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<f64> {
    // Every fourth pair is axis-aligned.
    if k.is_multiple_of(4) {
        let mut v = vec![0.0; d];
        v[(k / 4) % d] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        return v;
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

/// Max of `|φ(x) - φ(y)| / |x - y|^α` over seeded pairs at stratified scales
/// `10^{-1}, …, 10^{-6}`. The pair sequence is a prefix of the sequence for any
/// larger `n_pairs`, so the estimate is monotone in `n_pairs`.
pub fn holder_seminorm(f: &dyn Fn(&[f64]) -> f64, d: usize, alpha: f64, n_pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for k in 0..n_pairs {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let dir = random_direction(&mut rng, d, k);
        let scale = 10f64.powi(-((k % 6) as i32 + 1));
        let r = scale * (0.5 + 0.5 * rng.gen::<f64>());
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + r * b).collect();
        let q = (f(&x) - f(&y)).abs() / r.powf(alpha);
        if q.is_finite() {
            best = best.max(q);
        }
    }
    best
}

/// `φ^u(x) = -log ‖Dg(x)|E^u(x)‖`.
pub fn geometric_potential(map: &DAMap, n_back: usize) -> Potential {
    Potential::geometric(map, n_back)
}

pub fn default_geometric(map: &DAMap) -> Potential {
    geometric_potential(map, DEFAULT_N_BACK)
}
