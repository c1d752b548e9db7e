use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use toml::{Table, Value};

use crate::config::{DomainGuards, NumericsConfig};
use crate::diagnostics::SectionSpec;
use crate::error::{Error, Result};
use crate::integrators::{ButcherTableau, HPState, Integrator};
use crate::lie::{AlgebraElement, Group, GroupElement};
use crate::models::{HeavyTop, Model, RigidBody, UnderwaterVehicle};
use crate::retraction::{Retraction, RetractionKind};

/// Model id plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    RigidBody {
        inertia: [f64; 3],
    },
    HeavyTop {
        inertia: [f64; 3],
        mgl: f64,
        chi: [f64; 3],
    },
    UnderwaterVehicle {
        j: [f64; 9],
        m: [f64; 9],
        d: [f64; 9],
        buoyancy: f64,
        r_b: [f64; 3],
    },
}

impl ModelSpec {
    pub const IDS: [&'static str; 3] = ["rigid_body", "heavy_top", "underwater_vehicle"];

    pub fn default_for(id: &str) -> Option<Self> {
        Some(match id {
            "rigid_body" => ModelSpec::RigidBody { inertia: [1.0, 2.0, 3.0] },
            "heavy_top" => ModelSpec::HeavyTop {
                inertia: [1.0, 2.0, 3.0],
                mgl: 1.0,
                chi: [0.0, 0.0, 1.0],
            },
            "underwater_vehicle" => ModelSpec::UnderwaterVehicle {
                j: [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0],
                m: [3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0],
                d: [0.0; 9],
                buoyancy: 0.1,
                r_b: [0.0, 0.0, 0.05],
            },
            _ => return None,
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::RigidBody { .. } => "rigid_body",
            ModelSpec::HeavyTop { .. } => "heavy_top",
            ModelSpec::UnderwaterVehicle { .. } => "underwater_vehicle",
        }
    }

    pub fn group(&self) -> Group {
        match self {
            ModelSpec::UnderwaterVehicle { .. } => Group::SE3,
            _ => Group::SO3,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Model>> {
        let v3 = |a: &[f64; 3]| Vector3::from_column_slice(a);
        let m3 = |a: &[f64; 9]| Matrix3::from_row_slice(a);
        Ok(match self {
            ModelSpec::RigidBody { inertia } => Box::new(RigidBody::new(v3(inertia))?),
            ModelSpec::HeavyTop { inertia, mgl, chi } => Box::new(HeavyTop::new(v3(inertia), *mgl, v3(chi))?),
            ModelSpec::UnderwaterVehicle { j, m, d, buoyancy, r_b } => {
                Box::new(UnderwaterVehicle::new(m3(j), m3(m), m3(d), *buoyancy, v3(r_b))?)
            }
        })
    }

    fn params(&self) -> Vec<(&'static str, Vec<f64>)> {
        match self {
            ModelSpec::RigidBody { inertia } => vec![("inertia", inertia.to_vec())],
            ModelSpec::HeavyTop { inertia, mgl, chi } => {
                vec![("inertia", inertia.to_vec()), ("mgl", vec![*mgl]), ("chi", chi.to_vec())]
            }
            ModelSpec::UnderwaterVehicle { j, m, d, buoyancy, r_b } => vec![
                ("J", j.to_vec()),
                ("M", m.to_vec()),
                ("D", d.to_vec()),
                ("buoyancy", vec![*buoyancy]),
                ("r_b", r_b.to_vec()),
            ],
        }
    }
}

/// Inline Butcher coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub method: String,
    pub retraction: RetractionKind,
    pub tableau: Option<InlineTableau>,
    pub t_span: (f64, f64),
    pub steps: usize,
    /// Row-major group matrix.
    pub initial_g: Vec<f64>,
    pub initial_xi: Vec<f64>,
    pub numerics: NumericsConfig,
    pub output: Option<PathBuf>,
    pub section: Option<SectionSpec>,
}

/// Everything needed to start integrating.
#[derive(Debug)]
pub struct Prepared {
    pub model: Box<dyn Model>,
    pub integrator: Integrator,
    pub h: f64,
    pub initial: HPState,
}

impl RunConfig {
    pub fn new(model: ModelSpec, method: &str) -> Self {
        let group = model.group();
        let n = group.matrix_dim();
        let d = group.algebra_dim();
        let mut xi = vec![0.0; d];
        xi[..3].copy_from_slice(&[1.0, 0.5, -0.2]);
        Self {
            model,
            method: method.into(),
            retraction: RetractionKind::Cayley,
            tableau: None,
            t_span: (0.0, 10.0),
            steps: 200,
            initial_g: DMatrix::<f64>::identity(n, n).transpose().as_slice().to_vec(),
            initial_xi: xi,
            numerics: NumericsConfig::default(),
            output: None,
            section: None,
        }
    }

    pub fn h(&self) -> f64 {
        (self.t_span.1 - self.t_span.0) / self.steps as f64
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.to_string()]))?;
        let mut r = Reader {
            errors: Vec::new(),
            used: Vec::new(),
        };
        let model_id = r.string(&table, "model.id").unwrap_or_else(|| "rigid_body".into());
        let model = match ModelSpec::default_for(&model_id) {
            Some(defaults) => r.model_params(&table, defaults),
            None => {
                r.errors.push(format!("model.id: unknown model '{model_id}' (known: {})", ModelSpec::IDS.join(", ")));
                ModelSpec::default_for("rigid_body").unwrap()
            }
        };
        let mut cfg = RunConfig::new(model, "sv");
        if let Some(m) = r.string(&table, "method") {
            cfg.method = m;
        }
        if let Some(k) = r.string(&table, "retraction") {
            match k.parse() {
                Ok(k) => cfg.retraction = k,
                Err(e) => r.errors.push(format!("retraction: {e}")),
            }
        }
        let a = r.matrix(&table, "tableau.a");
        let b = r.floats(&table, "tableau.b");
        match (a, b) {
            (Some(a), Some(b)) => cfg.tableau = Some(InlineTableau { a, b }),
            (None, None) => {}
            _ => r.errors.push("tableau: both tableau.a and tableau.b are required".into()),
        }
        if let Some(ts) = r.floats(&table, "t_span") {
            if ts.len() == 2 {
                cfg.t_span = (ts[0], ts[1]);
            } else {
                r.errors.push(format!("t_span: expected [a, b], got {} values", ts.len()));
            }
        }
        if let Some(n) = r.integer(&table, "steps") {
            if n >= 1 {
                cfg.steps = n as usize;
            } else {
                r.errors.push(format!("steps: must be >= 1, got {n}"));
            }
        }
        if let Some(g) = r.floats(&table, "initial.g") {
            cfg.initial_g = g;
        }
        if let Some(xi) = r.floats(&table, "initial.xi") {
            cfg.initial_xi = xi;
        }
        let nc = &mut cfg.numerics;
        let guards = &mut nc.domain_guards;
        for (key, slot) in [
            ("numerics.domain_guards.exp", &mut guards.exp),
            ("numerics.domain_guards.cayley", &mut guards.cayley),
            ("numerics.domain_guards.skew_sqrt", &mut guards.skew_sqrt),
        ] {
            if let Some(v) = r.float(&table, key) {
                *slot = v;
            }
        }
        for (key, slot) in [
            ("numerics.newton_tol", &mut nc.newton_tol),
            ("numerics.newton_fd_step", &mut nc.newton_fd_step),
            ("numerics.fd_step", &mut nc.fd_step),
            ("numerics.chart_fd_step", &mut nc.chart_fd_step),
        ] {
            if let Some(v) = r.float(&table, key) {
                *slot = v;
            }
        }
        if let Some(v) = r.integer(&table, "numerics.newton_max_iter") {
            nc.newton_max_iter = v.max(0) as usize;
            if v < 1 {
                r.errors.push(format!("numerics.newton_max_iter: must be >= 1, got {v}"));
            }
        }
        if let Some(v) = r.integer(&table, "numerics.series_q") {
            nc.series_q = v;
        }
        if let Some(o) = r.string(&table, "output") {
            cfg.output = Some(PathBuf::from(o));
        }
        let coordinate = r.string(&table, "section.coordinate");
        let level = r.float(&table, "section.level");
        let direction = r.integer(&table, "section.direction");
        if coordinate.is_some() || level.is_some() || direction.is_some() {
            let d = SectionSpec::default();
            cfg.section = Some(SectionSpec {
                coordinate: coordinate.unwrap_or(d.coordinate),
                level: level.unwrap_or(d.level),
                direction: direction.map(|v| v as i32).unwrap_or(d.direction),
            });
        }
        r.unknown_keys(&table, "");
        if !r.errors.is_empty() {
            return Err(Error::InvalidConfig(r.errors));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Flat `key = value` form accepted by [`RunConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model.id = {}", quote(self.model.id()));
        for (k, v) in self.model.params() {
            if v.len() == 1 {
                let _ = writeln!(s, "model.{k} = {}", float(v[0]));
            } else {
                let _ = writeln!(s, "model.{k} = {}", float_list(&v));
            }
        }
        let _ = writeln!(s, "method = {}", quote(&self.method));
        let _ = writeln!(s, "retraction = {}", quote(self.retraction.name()));
        if let Some(t) = &self.tableau {
            let rows: Vec<String> = t.a.iter().map(|r| float_list(r)).collect();
            let _ = writeln!(s, "tableau.a = [{}]", rows.join(", "));
            let _ = writeln!(s, "tableau.b = {}", float_list(&t.b));
        }
        let _ = writeln!(s, "t_span = {}", float_list(&[self.t_span.0, self.t_span.1]));
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "initial.g = {}", float_list(&self.initial_g));
        let _ = writeln!(s, "initial.xi = {}", float_list(&self.initial_xi));
        let n = &self.numerics;
        let _ = writeln!(s, "numerics.newton_tol = {}", float(n.newton_tol));
        let _ = writeln!(s, "numerics.newton_max_iter = {}", n.newton_max_iter);
        let _ = writeln!(s, "numerics.newton_fd_step = {}", float(n.newton_fd_step));
        let _ = writeln!(s, "numerics.fd_step = {}", float(n.fd_step));
        let _ = writeln!(s, "numerics.chart_fd_step = {}", float(n.chart_fd_step));
        let _ = writeln!(s, "numerics.series_q = {}", n.series_q);
        let DomainGuards { exp, cayley, skew_sqrt } = n.domain_guards;
        let _ = writeln!(s, "numerics.domain_guards.exp = {}", float(exp));
        let _ = writeln!(s, "numerics.domain_guards.cayley = {}", float(cayley));
        let _ = writeln!(s, "numerics.domain_guards.skew_sqrt = {}", float(skew_sqrt));
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output = {}", quote(&o.to_string_lossy()));
        }
        if let Some(sec) = &self.section {
            let _ = writeln!(s, "section.coordinate = {}", quote(&sec.coordinate));
            let _ = writeln!(s, "section.level = {}", float(sec.level));
            let _ = writeln!(s, "section.direction = {}", sec.direction);
        }
        s
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let group = self.model.group();
        if let Err(e) = self.model.build() {
            errors.push(format!("model: {e}"));
        }
        let (a, b) = self.t_span;
        if !(a.is_finite() && b.is_finite() && b > a) {
            errors.push(format!("t_span: need finite a < b, got [{a}, {b}]"));
        }
        if self.steps < 1 {
            errors.push("steps: must be >= 1".into());
        }
        if let Err(e) = self.numerics.validate() {
            errors.extend(e.into_iter().map(|m| format!("numerics: {m}")));
        }
        let n = group.matrix_dim();
        if self.initial_g.len() != n * n {
            errors.push(format!("initial.g: expected {} entries for {}, got {}", n * n, group.name(), self.initial_g.len()));
        } else if let Err(e) = GroupElement::new(group, DMatrix::from_row_slice(n, n, &self.initial_g)) {
            errors.push(format!("initial.g: {e}"));
        }
        if self.initial_xi.len() != group.algebra_dim() {
            errors.push(format!(
                "initial.xi: expected {} entries for {}, got {}",
                group.algebra_dim(),
                group.name(),
                self.initial_xi.len()
            ));
        }
        if !self.retraction.supports(group) {
            errors.push(format!("retraction: {} is not available on {}", self.retraction, group.name()));
        }
        if let Err(e) = self.integrator() {
            match e {
                Error::InvalidConfig(m) => errors.extend(m),
                other => errors.push(other.to_string()),
            }
        }
        if let Some(sec) = &self.section {
            for r in [sec.validate(), sec.index(group).map(|_| ())] {
                if let Err(Error::InvalidConfig(m)) = r {
                    errors.extend(m);
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }

    /// With an inline tableau, the bare ids `vprk` and `rkmk` are accepted.
    pub fn integrator(&self) -> Result<Integrator> {
        let spec = match (self.method.as_str(), &self.tableau) {
            ("vprk" | "rkmk", Some(_)) => format!("{}:forward_euler", self.method),
            _ => self.method.clone(),
        };
        let mut it = Integrator::parse(&spec, self.retraction, self.numerics)?;
        if let Some(t) = &self.tableau {
            if !it.method.uses_tableau() {
                return Err(Error::InvalidConfig(vec![format!("tableau: method '{}' does not take a tableau", self.method)]));
            }
            let tableau = ButcherTableau::from_rows("inline", &t.a, &t.b).map_err(|e| Error::InvalidConfig(vec![format!("tableau: {e}")]))?;
            it = Integrator::new(it.method.with_tableau(tableau), it.retraction.kind, self.numerics);
        }
        Ok(it)
    }

    /// Replaces the initial state by a seeded random one: `g = exp(η)` with
    /// `‖η‖ ≤ 1` and `ξ` uniform in `[−1, 1]ᵈ`.
    pub fn randomize_initial(&mut self, seed: u64) {
        let group = self.model.group();
        let d = group.algebra_dim();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let eta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0) / (d as f64).sqrt()).collect();
        let g = Retraction::exp().tau(&AlgebraElement::from_slice(group, &eta).unwrap()).unwrap();
        let n = group.matrix_dim();
        self.initial_g = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g.matrix()[(i, j)]).collect();
        self.initial_xi = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    }

    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let model = self.model.build()?;
        let group = model.group();
        let n = group.matrix_dim();
        let g = GroupElement::new(group, DMatrix::from_row_slice(n, n, &self.initial_g))?;
        let xi = AlgebraElement::from_slice(group, &self.initial_xi)?;
        let initial = HPState::from_velocity(model.as_ref(), g, xi, self.t_span.0)?;
        Ok(Prepared {
            integrator: self.integrator()?,
            h: self.h(),
            initial,
            model,
        })
    }
}

fn quote(s: &str) -> String {
    Value::String(s.into()).to_string()
}

fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

fn float_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| float(x)).collect::<Vec<_>>().join(", "))
}

struct Reader {
    errors: Vec<String>,
    used: Vec<String>,
}

impl Reader {
    fn get<'t>(&mut self, table: &'t Table, key: &str) -> Option<&'t Value> {
        let mut cur = table;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, p) in parts.iter().enumerate() {
            let v = cur.get(*p)?;
            if i + 1 == parts.len() {
                self.used.push(key.into());
                return Some(v);
            }
            cur = v.as_table()?;
        }
        None
    }

    fn string(&mut self, t: &Table, key: &str) -> Option<String> {
        match self.get(t, key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.errors.push(format!("{key}: expected a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn to_f64(v: &Value) -> Option<f64> {
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn float(&mut self, t: &Table, key: &str) -> Option<f64> {
        let v = self.get(t, key)?;
        let f = Self::to_f64(v);
        if f.is_none() {
            self.errors.push(format!("{key}: expected a number, got {}", v.type_str()));
        }
        f
    }

    fn integer(&mut self, t: &Table, key: &str) -> Option<i64> {
        match self.get(t, key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.errors.push(format!("{key}: expected an integer, got {}", other.type_str()));
                None
            }
        }
    }

    fn floats(&mut self, t: &Table, key: &str) -> Option<Vec<f64>> {
        let v = self.get(t, key)?;
        let parsed = v.as_array().and_then(|a| a.iter().map(Self::to_f64).collect::<Option<Vec<_>>>());
        if parsed.is_none() {
            self.errors.push(format!("{key}: expected an array of numbers"));
        }
        parsed
    }

    fn matrix(&mut self, t: &Table, key: &str) -> Option<Vec<Vec<f64>>> {
        let v = self.get(t, key)?;
        let parsed = v.as_array().and_then(|rows| {
            rows.iter()
                .map(|r| r.as_array().and_then(|a| a.iter().map(Self::to_f64).collect::<Option<Vec<_>>>()))
                .collect::<Option<Vec<_>>>()
        });
        if parsed.is_none() {
            self.errors.push(format!("{key}: expected an array of number arrays"));
        }
        parsed
    }

    fn fixed<const N: usize>(&mut self, t: &Table, key: &str, slot: &mut [f64; N]) {
        if let Some(v) = self.floats(t, key) {
            match <[f64; N]>::try_from(v.as_slice()) {
                Ok(a) => *slot = a,
                Err(_) => self.errors.push(format!("{key}: expected {N} values, got {}", v.len())),
            }
        }
    }

    fn model_params(&mut self, t: &Table, mut spec: ModelSpec) -> ModelSpec {
        match &mut spec {
            ModelSpec::RigidBody { inertia } => self.fixed(t, "model.inertia", inertia),
            ModelSpec::HeavyTop { inertia, mgl, chi } => {
                self.fixed(t, "model.inertia", inertia);
                if let Some(v) = self.float(t, "model.mgl") {
                    *mgl = v;
                }
                self.fixed(t, "model.chi", chi);
            }
            ModelSpec::UnderwaterVehicle { j, m, d, buoyancy, r_b } => {
                self.fixed(t, "model.J", j);
                self.fixed(t, "model.M", m);
                self.fixed(t, "model.D", d);
                if let Some(v) = self.float(t, "model.buoyancy") {
                    *buoyancy = v;
                }
                self.fixed(t, "model.r_b", r_b);
            }
        }
        spec
    }

    fn unknown_keys(&mut self, t: &Table, prefix: &str) {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            if self.used.contains(&key) {
                continue;
            }
            match v {
                Value::Table(inner) => self.unknown_keys(inner, &key),
                _ => self.errors.push(format!("{key}: unknown key")),
            }
        }
    }
}
