//! Bivariate-bicycle CSS codes.
//!
//! For cyclic shifts `S_l`, `S_m` the generators are `x = S_l ⊗ I_m` and
//! `y = I_l ⊗ S_m`. Two weight-3 polynomials `A`, `B` in `x` and `y` give
//! `hx = [A | B]` and `hz = [Bᵀ | Aᵀ]`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{quotient_basis, BinaryMatrix, BitVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    X,
    Y,
}

/// A single power of `x` or `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub variable: Variable,
    pub power: usize,
}

impl Monomial {
    pub fn x(power: usize) -> Self {
        Monomial {
            variable: Variable::X,
            power,
        }
    }

    pub fn y(power: usize) -> Self {
        Monomial {
            variable: Variable::Y,
            power,
        }
    }

    fn reduced(self, l: usize, m: usize) -> Self {
        let modulus = match self.variable {
            Variable::X => l,
            Variable::Y => m,
        };
        Monomial {
            variable: self.variable,
            power: self.power % modulus,
        }
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (var, rest) = s.split_at(s.len().min(1));
        let variable = match var {
            "x" | "X" => Variable::X,
            "y" | "Y" => Variable::Y,
            _ => return Err(Error::InvalidCodeSpec(format!("bad monomial '{s}'"))),
        };
        let power = if rest.is_empty() {
            1
        } else {
            rest.strip_prefix('^')
                .and_then(|p| p.parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidCodeSpec(format!("bad monomial '{s}'")))?
        };
        Ok(Monomial { variable, power })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.variable {
            Variable::X => "x",
            Variable::Y => "y",
        };
        if self.power == 1 {
            write!(f, "{v}")
        } else {
            write!(f, "{v}^{}", self.power)
        }
    }
}

/// Parameters of a bivariate-bicycle code. Exponents are stored reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BbCodeSpec {
    pub l: usize,
    pub m: usize,
    pub a_terms: [Monomial; 3],
    pub b_terms: [Monomial; 3],
    /// Code distance, when known. Used to derive round counts and decoder budgets.
    pub distance: Option<usize>,
    pub name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BbCodeSpecFile {
    l: usize,
    m: usize,
    a_terms: Vec<String>,
    b_terms: Vec<String>,
    distance: Option<usize>,
    name: Option<String>,
}

impl BbCodeSpec {
    /// Validates and reduces the given terms. Terms repeated verbatim are
    /// rejected; terms that only coincide after reduction are kept and cancel
    /// in the sum.
    pub fn new(l: usize, m: usize, a_terms: [Monomial; 3], b_terms: [Monomial; 3]) -> Result<Self> {
        if l == 0 || m == 0 {
            return Err(Error::InvalidCodeSpec("l and m must be positive".into()));
        }
        for (name, terms) in [("A", &a_terms), ("B", &b_terms)] {
            for i in 0..3 {
                for j in i + 1..3 {
                    if terms[i] == terms[j] {
                        return Err(Error::InvalidCodeSpec(format!(
                            "polynomial {name} repeats the term {}",
                            terms[i]
                        )));
                    }
                }
            }
        }
        Ok(BbCodeSpec {
            l,
            m,
            a_terms: a_terms.map(|t| t.reduced(l, m)),
            b_terms: b_terms.map(|t| t.reduced(l, m)),
            distance: None,
            name: None,
        })
    }

    pub fn with_distance(mut self, d: usize) -> Self {
        self.distance = Some(d);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    fn table_polynomials() -> ([Monomial; 3], [Monomial; 3]) {
        (
            [Monomial::x(3), Monomial::y(1), Monomial::y(2)],
            [Monomial::y(3), Monomial::x(1), Monomial::x(2)],
        )
    }

    /// The `[[72, 12, 6]]` code.
    pub fn bb72() -> Self {
        let (a, b) = Self::table_polynomials();
        Self::new(6, 6, a, b).unwrap().with_distance(6).with_name("bb72")
    }

    /// The `[[108, 8, 10]]` code.
    pub fn bb108() -> Self {
        let (a, b) = Self::table_polynomials();
        Self::new(9, 6, a, b).unwrap().with_distance(10).with_name("bb108")
    }

    /// The `[[144, 12, 12]]` code.
    pub fn bb144() -> Self {
        let (a, b) = Self::table_polynomials();
        Self::new(12, 6, a, b).unwrap().with_distance(12).with_name("bb144")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: BbCodeSpecFile =
            toml::from_str(text).map_err(|e| Error::InvalidCodeSpec(e.to_string()))?;
        let terms = |v: &[String], which: &str| -> Result<[Monomial; 3]> {
            if v.len() != 3 {
                return Err(Error::InvalidCodeSpec(format!(
                    "{which} needs exactly three terms, got {}",
                    v.len()
                )));
            }
            Ok([v[0].parse()?, v[1].parse()?, v[2].parse()?])
        };
        let mut spec = Self::new(raw.l, raw.m, terms(&raw.a_terms, "a_terms")?, terms(&raw.b_terms, "b_terms")?)?;
        spec.distance = raw.distance;
        spec.name = raw.name;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        // Terms that coincide after reduction are written with distinct
        // unreduced exponents so the output parses back to the same spec.
        let quote = |ts: &[Monomial; 3]| {
            let mut written: Vec<Monomial> = Vec::new();
            for &t in ts {
                let modulus = match t.variable {
                    Variable::X => self.l,
                    Variable::Y => self.m,
                };
                let mut u = t;
                while written.contains(&u) {
                    u.power += modulus;
                }
                written.push(u);
            }
            written.iter().map(|t| format!("\"{t}\"")).collect::<Vec<_>>().join(", ")
        };
        let mut out = String::new();
        if let Some(name) = &self.name {
            out.push_str(&format!("name = \"{name}\"\n"));
        }
        out.push_str(&format!("l = {}\nm = {}\n", self.l, self.m));
        out.push_str(&format!("a_terms = [{}]\n", quote(&self.a_terms)));
        out.push_str(&format!("b_terms = [{}]\n", quote(&self.b_terms)));
        if let Some(d) = self.distance {
            out.push_str(&format!("distance = {d}\n"));
        }
        out
    }

    pub fn n(&self) -> usize {
        2 * self.l * self.m
    }
}

/// A CSS code with X/Z check matrices and logical-operator bases.
#[derive(Clone, Debug)]
pub struct CssCode {
    pub n: usize,
    pub k: usize,
    /// X-type checks; detect Z errors.
    pub hx: BinaryMatrix,
    /// Z-type checks; detect X errors.
    pub hz: BinaryMatrix,
    /// X-type logical representatives: `ker(hz)` modulo `rowspace(hx)`.
    pub logical_x: Vec<BitVector>,
    /// Z-type logical representatives: `ker(hx)` modulo `rowspace(hz)`.
    pub logical_z: Vec<BitVector>,
    pub distance: Option<usize>,
    pub name: Option<String>,
}

impl CssCode {
    pub fn new(hx: BinaryMatrix, hz: BinaryMatrix) -> Result<Self> {
        if hx.cols() != hz.cols() {
            return Err(Error::DimensionMismatch {
                context: "CSS check matrices",
                expected: hx.cols(),
                found: hz.cols(),
            });
        }
        if !hx.mul(&hz.transpose())?.is_zero() {
            return Err(Error::InvalidCodeSpec("hx and hz do not commute".into()));
        }
        let n = hx.cols();
        let k = n - hx.rank() - hz.rank();
        let logical_z = quotient_basis(&hz.row_vectors(), &hx.kernel_basis())?;
        let logical_x = quotient_basis(&hx.row_vectors(), &hz.kernel_basis())?;
        debug_assert_eq!(logical_x.len(), k);
        debug_assert_eq!(logical_z.len(), k);
        Ok(CssCode {
            n,
            k,
            hx,
            hz,
            logical_x,
            logical_z,
            distance: None,
            name: None,
        })
    }

    /// Logical operators as matrix rows, e.g. the observable matrix of a model.
    pub fn logical_matrix(vectors: &[BitVector], n: usize) -> BinaryMatrix {
        BinaryMatrix::from_entries(
            vectors.len(),
            n,
            vectors
                .iter()
                .enumerate()
                .flat_map(|(r, v)| v.support().iter().map(move |&c| (r, c))),
        )
        .expect("logical supports lie within n")
    }
}

/// `size × size` permutation with ones at `(i, i+1 mod size)`.
pub fn cyclic_shift(size: usize) -> Result<BinaryMatrix> {
    if size == 0 {
        return Err(Error::InvalidParameter("cyclic shift size must be positive".into()));
    }
    BinaryMatrix::from_entries(size, size, (0..size).map(|i| (i, (i + 1) % size)))
}

fn kron(a: &BinaryMatrix, b: &BinaryMatrix) -> BinaryMatrix {
    let entries = a.entries().flat_map(|(ar, ac)| {
        b.entries()
            .map(move |(br, bc)| (ar * b.rows() + br, ac * b.cols() + bc))
    });
    BinaryMatrix::from_entries(a.rows() * b.rows(), a.cols() * b.cols(), entries.collect::<Vec<_>>())
        .expect("kronecker indices in range")
}

fn power(base: &BinaryMatrix, exp: usize) -> BinaryMatrix {
    let mut out = BinaryMatrix::identity(base.rows());
    for _ in 0..exp {
        out = out.mul(base).expect("square");
    }
    out
}

/// `x = S_l ⊗ I_m` and `y = I_l ⊗ S_m`.
pub fn build_xy(l: usize, m: usize) -> Result<(BinaryMatrix, BinaryMatrix)> {
    let sl = cyclic_shift(l)?;
    let sm = cyclic_shift(m)?;
    Ok((
        kron(&sl, &BinaryMatrix::identity(m)),
        kron(&BinaryMatrix::identity(l), &sm),
    ))
}

pub fn build_bb_code(spec: &BbCodeSpec) -> Result<CssCode> {
    let (x, y) = build_xy(spec.l, spec.m)?;
    let eval = |terms: &[Monomial; 3]| -> Result<BinaryMatrix> {
        let lm = spec.l * spec.m;
        let mut acc = BinaryMatrix::zeros(lm, lm);
        for t in terms {
            let base = match t.variable {
                Variable::X => &x,
                Variable::Y => &y,
            };
            acc = acc.add(&power(base, t.power))?;
        }
        Ok(acc)
    };
    let a = eval(&spec.a_terms)?;
    let b = eval(&spec.b_terms)?;
    let hx = a.hstack(&b)?;
    let hz = b.transpose().hstack(&a.transpose())?;
    let mut code = CssCode::new(hx, hz)?;
    code.distance = spec.distance;
    code.name = spec.name.clone();
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_shift_small() {
        assert_eq!(cyclic_shift(1).unwrap(), BinaryMatrix::identity(1));
        assert_eq!(
            cyclic_shift(2).unwrap(),
            BinaryMatrix::from_dense(&[vec![0, 1], vec![1, 0]]).unwrap()
        );
        let s3 = cyclic_shift(3).unwrap();
        assert_eq!(s3.entries().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 0)]);
        assert!(cyclic_shift(0).is_err());
    }

    #[test]
    fn xy_small() {
        let (x, y) = build_xy(1, 1).unwrap();
        assert_eq!(x, BinaryMatrix::identity(1));
        assert_eq!(y, BinaryMatrix::identity(1));
        let (x, y) = build_xy(2, 1).unwrap();
        assert_eq!(x, BinaryMatrix::from_dense(&[vec![0, 1], vec![1, 0]]).unwrap());
        assert_eq!(y, BinaryMatrix::identity(2));
    }

    #[test]
    fn xy_commute_and_have_finite_order() {
        let (x, y) = build_xy(6, 6).unwrap();
        assert_eq!(x.rows(), 36);
        assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        assert_eq!(power(&x, 6), BinaryMatrix::identity(36));
        assert_eq!(power(&y, 6), BinaryMatrix::identity(36));
        assert_ne!(power(&x, 3), BinaryMatrix::identity(36));
    }

    #[test]
    fn monomial_parsing() {
        assert_eq!("x^3".parse::<Monomial>().unwrap(), Monomial::x(3));
        assert_eq!("y".parse::<Monomial>().unwrap(), Monomial::y(1));
        assert_eq!(" y^0 ".parse::<Monomial>().unwrap(), Monomial::y(0));
        assert!("z^2".parse::<Monomial>().is_err());
        assert!("x^".parse::<Monomial>().is_err());
        assert!("x3".parse::<Monomial>().is_err());
        assert_eq!(Monomial::x(3).to_string(), "x^3");
        assert_eq!(Monomial::y(1).to_string(), "y");
    }

    #[test]
    fn exponents_reduce_modulo_order() {
        let spec = BbCodeSpec::new(
            6,
            4,
            [Monomial::x(9), Monomial::y(5), Monomial::y(2)],
            [Monomial::y(3), Monomial::x(1), Monomial::x(2)],
        )
        .unwrap();
        assert_eq!(spec.a_terms, [Monomial::x(3), Monomial::y(1), Monomial::y(2)]);
    }

    #[test]
    fn repeated_terms_are_rejected() {
        let err = BbCodeSpec::new(
            6,
            6,
            [Monomial::x(3), Monomial::y(1), Monomial::y(1)],
            [Monomial::y(3), Monomial::x(1), Monomial::x(2)],
        );
        assert!(matches!(err, Err(Error::InvalidCodeSpec(_))));
    }

    #[test]
    fn degenerate_one_by_one_code() {
        let (a, b) = BbCodeSpec::table_polynomials();
        let code = build_bb_code(&BbCodeSpec::new(1, 1, a, b).unwrap()).unwrap();
        assert_eq!((code.n, code.k), (2, 0));
        assert_eq!(code.hx, BinaryMatrix::from_dense(&[vec![1, 1]]).unwrap());
    }

    #[test]
    fn spec_file_round_trip() {
        let text = "l = 6\nm = 6\na_terms = [\"x^3\", \"y\", \"y^2\"]\nb_terms = [\"y^3\", \"x\", \"x^2\"]\ndistance = 6\n";
        let spec = BbCodeSpec::from_toml_str(text).unwrap();
        assert_eq!(spec.a_terms, BbCodeSpec::bb72().a_terms);
        assert_eq!(spec.distance, Some(6));
        let again = BbCodeSpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(again, spec);
        assert!(BbCodeSpec::from_toml_str("l = 6\nm = 6\na_terms = [\"x\"]\nb_terms = []\n").is_err());
    }

    #[test]
    fn non_commuting_checks_are_rejected() {
        let hx = BinaryMatrix::from_dense(&[vec![1, 0]]).unwrap();
        let hz = BinaryMatrix::from_dense(&[vec![1, 0]]).unwrap();
        assert!(CssCode::new(hx, hz).is_err());
    }
}
