//! Integer arithmetic for the Hirzebruch surfaces F_k polarized so that the
//! fiber class has area 1 and the negative section has area k.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A class a·F + b·D in the basis (fiber, negative section).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Class {
    pub f: i64,
    pub d: i64,
}

impl Class {
    pub const fn new(f: i64, d: i64) -> Self {
        Class { f, d }
    }
}

/// Intersection form and area vector of F_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceClasses {
    pub k: i64,
    pub intersection: [[i64; 2]; 2],
    pub areas: [i64; 2],
}

impl SurfaceClasses {
    pub fn new(k: i64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidK);
        }
        Ok(SurfaceClasses {
            k,
            intersection: [[0, 1], [1, -k]],
            areas: [1, k],
        })
    }

    pub fn dot(&self, a: Class, b: Class) -> i64 {
        let (x, y) = ([a.f, a.d], [b.f, b.d]);
        let m = self.intersection;
        (0..2).map(|i| (0..2).map(|j| x[i] * m[i][j] * y[j]).sum::<i64>()).sum()
    }

    pub fn area(&self, a: Class) -> i64 {
        a.f * self.areas[0] + a.d * self.areas[1]
    }

    pub fn determinant(&self) -> i64 {
        let m = self.intersection;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// Symplectomorphism type of F_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Classification {
    /// S² × S² with factor areas (1, 3l); the factors are F and lF + D.
    #[serde(rename = "S2xS2")]
    Product { l: i64, first: Class, second: Class, areas: [i64; 2] },
    /// CP² blown up once, with line class L = (l+1)F + D and exceptional
    /// class E = lF + D.
    #[serde(rename = "CP2#-CP2")]
    BlowUp { l: i64, line: Class, exceptional: Class, line_area: i64, exceptional_area: i64 },
}

pub fn classify(k: i64) -> Result<Classification> {
    let s = SurfaceClasses::new(k)?;
    let l = k / 2;
    Ok(if k % 2 == 0 {
        let first = Class::new(1, 0);
        let second = Class::new(l, 1);
        Classification::Product {
            l,
            first,
            second,
            areas: [s.area(first), s.area(second)],
        }
    } else {
        let line = Class::new(l + 1, 1);
        let exceptional = Class::new(l, 1);
        Classification::BlowUp {
            l,
            line,
            exceptional,
            line_area: s.area(line),
            exceptional_area: s.area(exceptional),
        }
    })
}

/// One integer identity and its values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub name: String,
    pub expected: i64,
    pub got: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub k: i64,
    pub classification: Classification,
    pub determinant: i64,
    pub identities: Vec<Identity>,
}

/// Checks the intersection numbers of the classes from [`classify`] and the
/// unimodularity of the form.
pub fn verify_class_identities(k: i64) -> Result<ClassReport> {
    let s = SurfaceClasses::new(k)?;
    let classification = classify(k)?;
    let mut identities = Vec::new();
    let mut push = |name: &str, expected: i64, got: i64| {
        identities.push(Identity {
            name: name.to_string(),
            expected,
            got,
        })
    };
    match classification {
        Classification::Product { first, second, .. } => {
            push("A.A", 0, s.dot(first, first));
            push("B.B", 0, s.dot(second, second));
            push("A.B", 1, s.dot(first, second));
        }
        Classification::BlowUp { line, exceptional, .. } => {
            push("L.L", 1, s.dot(line, line));
            push("E.E", -1, s.dot(exceptional, exceptional));
            push("L.E", 0, s.dot(line, exceptional));
        }
    }
    push("det", -1, s.determinant());
    if let Some(bad) = identities.iter().find(|i| i.expected != i.got) {
        return Err(Error::ClassIdentity(format!("{} = {} at k = {k}", bad.name, bad.got)));
    }
    Ok(ClassReport {
        k,
        classification,
        determinant: s.determinant(),
        identities,
    })
}
