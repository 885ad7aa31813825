//! Worked-example matrices bundled as JSON.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec, Rationals};
use crate::matrix::Matrix;

const FILES: &[(&str, &str)] = &[
    ("ex25_A", include_str!("../fixtures/ex25_A.json")),
    ("ex25_B", include_str!("../fixtures/ex25_B.json")),
    ("ex25_C", include_str!("../fixtures/ex25_C.json")),
    ("ex32_template", include_str!("../fixtures/ex32_template.json")),
    ("ex46_A", include_str!("../fixtures/ex46_A.json")),
    ("ex46_B", include_str!("../fixtures/ex46_B.json")),
    ("ex410_A", include_str!("../fixtures/ex410_A.json")),
    ("ex410_B", include_str!("../fixtures/ex410_B.json")),
    ("ex410_C", include_str!("../fixtures/ex410_C.json")),
    ("ex410_D", include_str!("../fixtures/ex410_D.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

pub fn raw(name: &str) -> Result<Value> {
    let text = FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::InvalidArgument(format!("no fixture named {name}")))?;
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// The field a matrix fixture is stored over.
pub fn field_of(name: &str) -> Result<FieldSpec> {
    let v = raw(name)?;
    FieldSpec::parse(v["field"].as_str().ok_or_else(|| Error::Parse("fixture has no field".into()))?)
}

/// A matrix fixture over its own field, or a rational fixture reduced into
/// `field`.
pub fn matrix<F: Field>(name: &str, field: &F) -> Result<Matrix<F>> {
    let v = raw(name)?;
    let stored = field_of(name)?;
    if stored == field.spec() {
        return Matrix::from_json_rows(field, &v["rows"]);
    }
    if !matches!(stored, FieldSpec::Rationals(_)) {
        return Err(Error::FieldMismatch);
    }
    let q = Matrix::from_json_rows(&Rationals, &v["rows"])?;
    let data = q
        .data()
        .iter()
        .map(|x| field.from_rational(x).ok_or(Error::DivisionByZero))
        .collect::<Result<Vec<_>>>()?;
    Matrix::new(field.clone(), q.rows(), q.cols(), data)
}

pub fn rational(name: &str) -> Result<Matrix<Rationals>> {
    matrix(name, &Rationals)
}

/// The symbolic 9×9 lift template evaluated at a 3×3 matrix.
pub fn ex32_template<F: Field>(a: &Matrix<F>) -> Result<Matrix<F>> {
    if a.square_dim()? != 3 {
        return Err(Error::DimMismatch("the template is for 3x3 matrices".into()));
    }
    let f = a.field();
    let v = raw("ex32_template")?;
    let rows = v["rows"].as_array().ok_or_else(|| Error::Parse("template rows".into()))?;
    let mut out = Matrix::zeros(f.clone(), 9, 9);
    for (r, row) in rows.iter().enumerate() {
        for (c, terms) in row.as_array().into_iter().flatten().enumerate() {
            let mut acc = f.zero();
            for term in terms.as_array().into_iter().flatten() {
                let coef = term[0].as_i64().ok_or_else(|| Error::Parse("template coefficient".into()))?;
                let ij = term[1].as_str().ok_or_else(|| Error::Parse("template index".into()))?.as_bytes();
                let (i, j) = ((ij[0] - b'1') as usize, (ij[1] - b'1') as usize);
                acc = f.add(&acc, &f.mul(&f.from_i64(coef), a.get(i, j)));
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::tests::gf;

    #[test]
    fn all_fixtures_parse() {
        for name in names() {
            assert!(raw(name).is_ok(), "{name}");
        }
        assert_eq!(rational("ex46_A").unwrap().rows(), 4);
        let f9 = gf("gf(9):1,0,1");
        let c = matrix("ex410_C", &f9).unwrap();
        assert_eq!(c.get(2, 2), &f9.generator().unwrap());
        let a = matrix("ex410_A", &f9).unwrap();
        assert!(a.commutes_with(&c).unwrap());
        assert!(matrix("ex410_C", &gf("gf(3)")).is_err());
    }

    #[test]
    fn template_is_the_lift_for_a_fixture() {
        let a = rational("ex25_A").unwrap();
        assert_eq!(ex32_template(&a).unwrap(), crate::commute::lift_m(&a).unwrap().matrix);
    }
}
