//! Eigenform data: loading and validating eigenvalue files, Hecke extension
//! to all indices, Satake parameters and local types at bad primes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, is_prime, primes_up_to};
use crate::characters::{CharacterSpec, DirichletCharacter};
use crate::exact::{q_frac, q_int, Cyclo, QuadExt, Scalar, Q};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated at q = {prime}: {reason}")]
    InvariantViolation { prime: u64, reason: String },
    #[error("remote source unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("eigenvalue table ends before prime {0}")]
    InsufficientPrimes(u64),
    #[error("{0} divides the level")]
    BadPrime(u64),
    #[error("{0} is a good prime for this form")]
    GoodPrime(u64),
    #[error("local type at q = {0} is ambiguous; the file must annotate it")]
    AmbiguousType(u64),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalAnnotation {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default = "default_subcase")]
    pub subcase: String,
    #[serde(default)]
    pub minimal_twist_aq: Option<(i64, i64)>,
}

fn default_subcase() -> String {
    "none".to_string()
}

/// Weierstrass coefficients [a1, a2, a3, a4, a6].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
}

impl Curve {
    pub fn b_invariants(&self) -> [i64; 4] {
        let Curve { a1, a2, a3, a4, a6 } = *self;
        [
            a1 * a1 + 4 * a2,
            2 * a4 + a1 * a3,
            a3 * a3 + 4 * a6,
            a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4,
        ]
    }

    pub fn c4(&self) -> Q {
        let [b2, b4, _, _] = self.b_invariants();
        q_int(b2 * b2 - 24 * b4)
    }

    pub fn c6(&self) -> Q {
        let [b2, b4, b6, _] = self.b_invariants();
        q_int(-b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6)
    }

    pub fn discriminant(&self) -> Q {
        let [b2, b4, b6, b8] = self.b_invariants();
        q_int(-b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6)
    }

    pub fn j_invariant(&self) -> Q {
        let c4 = self.c4();
        &c4 * &c4 * &c4 / self.discriminant()
    }
}

/// On-disk schema for an eigenform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenFile {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    pub nebentypus: CharacterSpec,
    pub ap: Vec<(u64, i64, i64)>,
    pub ap_bound: u64,
    #[serde(default)]
    pub local_types: BTreeMap<String, LocalAnnotation>,
    #[serde(default)]
    pub curve: Option<Curve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalKind {
    PrincipalUnramified,
    PrincipalRamifiedOne,
    Steinberg,
    Supercuspidal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subcase {
    None,
    S40,
    S41,
    S42,
    S43,
}

impl Subcase {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" | "" => Subcase::None,
            "s40" => Subcase::S40,
            "s41" => Subcase::S41,
            "s42" => Subcase::S42,
            "s43" => Subcase::S43,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LocalType {
    pub q: u64,
    pub kind: LocalKind,
    pub subcase: Subcase,
    /// True when q divides the level.
    pub bad: bool,
    pub a_q: Q,
    /// Eigenvalue of the twist-minimal form at q (case of a ramified twist
    /// of an unramified principal series).
    pub minimal_twist_aq: Option<Q>,
    pub satake: Option<(QuadExt, QuadExt)>,
}

#[derive(Debug, Clone)]
pub struct NewformData {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    pub psi: DirichletCharacter,
    pub ap: BTreeMap<u64, Q>,
    pub ap_bound: u64,
    pub annotations: BTreeMap<u64, LocalAnnotation>,
    pub curve: Option<Curve>,
}

pub fn load_eigendata(path: &Path) -> Result<NewformData, EigenError> {
    let text = std::fs::read_to_string(path).map_err(|e| EigenError::Io(format!("{}: {e}", path.display())))?;
    NewformData::from_json(&text)
}

/// Fetches `<endpoint>/<label>` over plain HTTP and parses the body with the
/// file schema.
pub fn fetch_remote(label: &str, endpoint: &str) -> Result<NewformData, EigenError> {
    let rest = endpoint
        .strip_prefix("http://")
        .ok_or_else(|| EigenError::RemoteUnavailable(format!("unsupported endpoint {endpoint}")))?;
    let (hostport, base) = match rest.find('/') {
        Some(i) => (&rest[..i], &rest[i..]),
        None => (rest, ""),
    };
    let addr = if hostport.contains(':') {
        hostport.to_string()
    } else {
        format!("{hostport}:80")
    };
    let unavailable = |e: std::io::Error| EigenError::RemoteUnavailable(e.to_string());
    let mut stream = std::net::TcpStream::connect(&addr).map_err(unavailable)?;
    let req = format!(
        "GET {}/{} HTTP/1.0\r\nHost: {}\r\nAccept: application/json\r\n\r\n",
        base.trim_end_matches('/'),
        label,
        hostport
    );
    stream.write_all(req.as_bytes()).map_err(unavailable)?;
    let mut buf = String::new();
    stream.read_to_string(&mut buf).map_err(unavailable)?;
    let (head, body) = buf
        .split_once("\r\n\r\n")
        .ok_or_else(|| EigenError::RemoteUnavailable("malformed response".into()))?;
    if !head.starts_with("HTTP/1.") || !head.split_whitespace().nth(1).is_some_and(|c| c == "200") {
        return Err(EigenError::RemoteUnavailable(
            head.lines().next().unwrap_or("").to_string(),
        ));
    }
    NewformData::from_json(body)
}

impl NewformData {
    pub fn from_json(text: &str) -> Result<Self, EigenError> {
        let file: EigenFile = serde_json::from_str(text).map_err(|e| EigenError::Schema(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: EigenFile) -> Result<Self, EigenError> {
        if file.ap.is_empty() {
            return Err(EigenError::Schema("eigenvalue list is empty".into()));
        }
        if file.level == 0 {
            return Err(EigenError::Schema("level must be positive".into()));
        }
        if file.weight < 2 {
            return Err(EigenError::Schema("weight must be at least 2".into()));
        }
        let psi = DirichletCharacter::from_spec(&file.nebentypus)
            .map_err(|e| EigenError::Schema(format!("nebentypus: {e}")))?;
        if file.level % psi.modulus() != 0 {
            return Err(EigenError::Schema("nebentypus modulus must divide the level".into()));
        }
        let mut ap = BTreeMap::new();
        for &(q, n, d) in &file.ap {
            if !is_prime(q) {
                return Err(EigenError::Schema(format!("{q} is not prime")));
            }
            if d == 0 {
                return Err(EigenError::Schema(format!("zero denominator at q = {q}")));
            }
            if ap.insert(q, q_frac(n, d)).is_some() {
                return Err(EigenError::Schema(format!("duplicate entry for q = {q}")));
            }
        }
        for q in primes_up_to(file.ap_bound) {
            if !ap.contains_key(&q) {
                return Err(EigenError::Schema(format!("missing a_q for q = {q} below ap_bound")));
            }
        }
        let mut annotations = BTreeMap::new();
        for (k, v) in file.local_types {
            let q: u64 = k
                .parse()
                .map_err(|_| EigenError::Schema(format!("local_types key '{k}' is not a prime")))?;
            if Subcase::parse(&v.subcase).is_none() {
                return Err(EigenError::Schema(format!("unknown subcase '{}'", v.subcase)));
            }
            if !["steinberg", "principal_ram", "supercuspidal"].contains(&v.kind.as_str()) {
                return Err(EigenError::Schema(format!("unknown local type '{}'", v.kind)));
            }
            annotations.insert(q, v);
        }
        let f = NewformData {
            label: file.label,
            level: file.level,
            weight: file.weight,
            psi,
            ap,
            ap_bound: file.ap_bound,
            annotations,
            curve: file.curve,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn to_file(&self) -> EigenFile {
        EigenFile {
            label: self.label.clone(),
            level: self.level,
            weight: self.weight,
            nebentypus: self.psi.to_spec(),
            ap: self
                .ap
                .iter()
                .map(|(&q, a)| (q, a.numer().try_into().unwrap_or(0), a.denom().try_into().unwrap_or(1)))
                .collect(),
            ap_bound: self.ap_bound,
            local_types: self
                .annotations
                .iter()
                .map(|(q, a)| (q.to_string(), a.clone()))
                .collect(),
            curve: self.curve,
        }
    }

    fn validate(&self) -> Result<(), EigenError> {
        let k = self.weight;
        for (&q, a) in &self.ap {
            if self.is_bad(q) {
                continue;
            }
            // a_q² ≤ 4 q^{k−1}
            let bound = q_int(4) * pow_q(q, k - 1);
            if a * a > bound {
                return Err(EigenError::InvariantViolation {
                    prime: q,
                    reason: format!("Ramanujan bound fails: a_q = {a}"),
                });
            }
        }
        for (q, e) in factorize(self.level) {
            let Some(a) = self.ap.get(&q) else { continue };
            if e == 1 && !a.is_zero() && !self.psi.is_ramified_at(q) {
                // a_q² = ψ*(q)·q^{k−2} for the Steinberg norm condition
                let lhs = Cyclo::rational(a * a);
                let rhs = self.psi.primitive_value(q as i64).scale(&pow_q(q, k - 2));
                if lhs != rhs {
                    return Err(EigenError::InvariantViolation {
                        prime: q,
                        reason: format!("Steinberg norm condition fails: a_q = {a}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> u32 {
        self.weight - 2
    }

    pub fn is_bad(&self, q: u64) -> bool {
        self.level % q == 0
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        factorize(self.level).into_iter().map(|(q, _)| q).collect()
    }

    pub fn ap(&self, q: u64) -> Result<&Q, EigenError> {
        self.ap.get(&q).ok_or(EigenError::InsufficientPrimes(q))
    }

    /// ψ(q)·q^{k−1}, the constant term of the Hecke polynomial at q.
    pub fn hecke_constant(&self, q: u64) -> Cyclo {
        self.psi.value(q as i64).scale(&pow_q(q, self.weight - 1))
    }

    /// λ(T(q^r)) for a prime q.
    pub fn lambda_prime_power(&self, q: u64, r: u32) -> Result<Cyclo, EigenError> {
        let a = Cyclo::rational(self.ap(q)?.clone());
        if self.is_bad(q) {
            return Ok(a.pow(r));
        }
        let c = self.hecke_constant(q);
        let (mut prev, mut cur) = (Cyclo::int(0), Cyclo::int(1));
        for _ in 0..r {
            let next = a.times(&cur).minus(&c.times(&prev));
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// λ(T(n)) for any positive n, using only the primes dividing n.
    pub fn lambda(&self, n: u64) -> Result<Cyclo, EigenError> {
        let mut acc = Cyclo::int(1);
        for (q, e) in factorize(n) {
            acc = acc.times(&self.lambda_prime_power(q, e)?);
        }
        Ok(acc)
    }

    /// Table λ(T(n)) for 0 ≤ n ≤ bound (entry 0 is zero).
    pub fn hecke_extend(&self, bound: u64) -> Result<Vec<Cyclo>, EigenError> {
        for q in primes_up_to(bound) {
            self.ap(q)?;
        }
        let mut out = vec![Cyclo::int(0); bound as usize + 1];
        if bound >= 1 {
            out[1] = Cyclo::int(1);
        }
        let mut spf = vec![0u64; bound as usize + 1];
        for q in primes_up_to(bound) {
            let mut j = q;
            while j <= bound {
                if spf[j as usize] == 0 {
                    spf[j as usize] = q;
                }
                j += q;
            }
        }
        let mut pp_cache: BTreeMap<(u64, u32), Cyclo> = BTreeMap::new();
        for n in 2..=bound {
            let q = spf[n as usize];
            let mut e = 0;
            let mut rest = n;
            while rest % q == 0 {
                rest /= q;
                e += 1;
            }
            let pp = match pp_cache.get(&(q, e)) {
                Some(v) => v.clone(),
                None => {
                    let v = self.lambda_prime_power(q, e)?;
                    pp_cache.insert((q, e), v.clone());
                    v
                }
            };
            out[n as usize] = pp.times(&out[rest as usize]);
        }
        Ok(out)
    }

    /// Roots α, β of X² − a_qX + ψ(q)q^{k−1} at a good prime.
    pub fn satake(&self, q: u64) -> Result<(QuadExt, QuadExt), EigenError> {
        if self.is_bad(q) {
            return Err(EigenError::BadPrime(q));
        }
        let a = Cyclo::rational(self.ap(q)?.clone());
        Ok(satake_roots(&a, &self.hecke_constant(q)))
    }

    pub fn classify_local_type(&self, q: u64) -> Result<LocalType, EigenError> {
        let a_q = self.ap(q)?.clone();
        if !self.is_bad(q) {
            return Ok(LocalType {
                q,
                kind: LocalKind::PrincipalUnramified,
                subcase: Subcase::None,
                bad: false,
                satake: Some(self.satake(q)?),
                minimal_twist_aq: None,
                a_q,
            });
        }
        let e = factorize(self.level)
            .into_iter()
            .find(|&(p, _)| p == q)
            .map(|(_, e)| e)
            .unwrap_or(0);
        let ann = self.annotations.get(&q);
        let twist_aq = ann.and_then(|a| a.minimal_twist_aq).map(|(n, d)| q_frac(n, d));
        let subcase = ann.and_then(|a| Subcase::parse(&a.subcase)).unwrap_or(Subcase::None);
        let mk = |kind: LocalKind| LocalType {
            q,
            kind,
            subcase,
            bad: true,
            a_q: a_q.clone(),
            minimal_twist_aq: twist_aq.clone(),
            satake: None,
        };
        let violation = |reason: &str| EigenError::InvariantViolation {
            prime: q,
            reason: reason.to_string(),
        };
        if let Some(ann) = ann {
            return match ann.kind.as_str() {
                "steinberg" => {
                    if e != 1 || a_q.is_zero() {
                        Err(violation("Steinberg annotation needs q || N and a_q ≠ 0"))
                    } else {
                        Ok(mk(LocalKind::Steinberg))
                    }
                }
                "principal_ram" if !a_q.is_zero() => Ok(mk(LocalKind::PrincipalRamifiedOne)),
                "principal_ram" => {
                    if twist_aq.is_none() {
                        Err(violation(
                            "ramified twist of an unramified series needs minimal_twist_aq",
                        ))
                    } else {
                        Ok(mk(LocalKind::PrincipalUnramified))
                    }
                }
                "supercuspidal" => {
                    if !a_q.is_zero() {
                        Err(violation("supercuspidal annotation needs a_q = 0"))
                    } else {
                        Ok(mk(LocalKind::Supercuspidal))
                    }
                }
                _ => Err(EigenError::Schema(format!("unknown local type '{}'", ann.kind))),
            };
        }
        if a_q.is_zero() {
            return Err(EigenError::AmbiguousType(q));
        }
        if e == 1 && !self.psi.is_ramified_at(q) {
            Ok(mk(LocalKind::Steinberg))
        } else {
            Ok(mk(LocalKind::PrincipalRamifiedOne))
        }
    }
}

/// Roots of X² − aX + c as elements of a quadratic extension.
pub fn satake_roots(a: &Cyclo, c: &Cyclo) -> (QuadExt, QuadExt) {
    let half = q_frac(1, 2);
    let disc = a.times(a).minus(&c.scale(&q_int(4)));
    let alpha = QuadExt::new(a.scale(&half), Cyclo::rational(half.clone()), disc.clone());
    let beta = QuadExt::new(a.scale(&half), Cyclo::rational(-half), disc);
    (alpha, beta)
}

pub(crate) fn pow_q(q: u64, e: u32) -> Q {
    q_int(q as i64).pow(e as i32)
}

/// |a_q| as f64, used by report tables.
pub fn abs_f64(x: &Q) -> f64 {
    crate::exact::q_to_f64(&x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{"label":"toy","level":11,"weight":2,
        "nebentypus":{"modulus":1,"values":[]},
        "ap":[[2,-2,1],[3,-1,1],[5,1,1],[7,-2,1],[11,1,1]],"ap_bound":11}"#;

    #[test]
    fn recursion_values() {
        let f = NewformData::from_json(TOY).unwrap();
        let t = f.hecke_extend(10).unwrap();
        assert_eq!(t[1], Cyclo::int(1));
        assert_eq!(t[4], Cyclo::int(2));
        assert_eq!(t[6], t[2].times(&t[3]));
        assert_eq!(f.lambda(121).unwrap(), Cyclo::int(1));
    }

    #[test]
    fn satake_11a_at_2() {
        let f = NewformData::from_json(TOY).unwrap();
        let (a, b) = f.satake(2).unwrap();
        let (za, zb) = (a.to_complex(), b.to_complex());
        assert!((za.re + 1.0).abs() < 1e-12 && (za.im.abs() - 1.0).abs() < 1e-12);
        assert!((za + zb).re + 2.0 < 1e-12);
        assert_eq!(a.times(&b).in_base(), Some(Cyclo::int(2)));
        assert!(matches!(f.satake(11), Err(EigenError::BadPrime(11))));
    }

    #[test]
    fn schema_and_invariant_errors() {
        let bad = TOY.replace("[2,-2,1]", "[2,5,1]");
        assert!(matches!(
            NewformData::from_json(&bad),
            Err(EigenError::InvariantViolation { prime: 2, .. })
        ));
        let empty =
            r#"{"label":"e","level":11,"weight":2,"nebentypus":{"modulus":1,"values":[]},"ap":[],"ap_bound":0}"#;
        assert!(matches!(NewformData::from_json(empty), Err(EigenError::Schema(_))));
        let missing = TOY.replace("[3,-1,1],", "");
        assert!(matches!(NewformData::from_json(&missing), Err(EigenError::Schema(_))));
    }

    #[test]
    fn local_types() {
        let f = NewformData::from_json(TOY).unwrap();
        assert_eq!(f.classify_local_type(11).unwrap().kind, LocalKind::Steinberg);
        let sq = r#"{"label":"sq","level":9,"weight":2,"nebentypus":{"modulus":1,"values":[]},
            "ap":[[2,0,1],[3,0,1]],"ap_bound":3}"#;
        let g = NewformData::from_json(sq).unwrap();
        assert!(matches!(g.classify_local_type(3), Err(EigenError::AmbiguousType(3))));
        let ann = sq.replace(
            r#""ap_bound":3"#,
            r#""ap_bound":3,"local_types":{"3":{"type":"supercuspidal","subcase":"s40"}}"#,
        );
        let h = NewformData::from_json(&ann).unwrap();
        let t = h.classify_local_type(3).unwrap();
        assert_eq!((t.kind, t.subcase), (LocalKind::Supercuspidal, Subcase::S40));
    }

    #[test]
    fn curve_invariants_11a() {
        let c = Curve {
            a1: 0,
            a2: -1,
            a3: 1,
            a4: -10,
            a6: -20,
        };
        assert_eq!(c.discriminant(), q_int(-161051));
        assert_eq!(c.j_invariant(), q_frac(-122023936, 161051));
    }
}
