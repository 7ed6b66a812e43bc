//! Flat-file formats: dataset CSV (`x1,...,xn,y[,zeta]`) and model JSON
//! (`{"n":..,"S":..,"params":[[..],..]}`).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Assignment, Dataset, SlModel};

/// Write a dataset as CSV. Floats use the shortest round-trip representation.
pub fn write_dataset_csv<W: Write>(data: &Dataset, mut w: W) -> Result<()> {
    let n = data.dim();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    if data.truth().is_some() {
        header.push("zeta".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for k in 0..data.len() {
        let mut line: Vec<String> = data.row(k).iter().map(|v| format!("{v:?}")).collect();
        line.push(format!("{:?}", data.output(k)));
        if let Some(t) = data.truth() {
            line.push(t.label(k).to_string());
        }
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn dataset_to_csv_string(data: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset_csv(data, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

/// Parse a dataset CSV. The truth column, when present, determines `S` as its maximum label.
pub fn read_dataset_csv<R: Read>(r: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let y_col = cols
        .iter()
        .position(|c| *c == "y")
        .ok_or_else(|| Error::Parse("missing `y` column".into()))?;
    for (i, c) in cols[..y_col].iter().enumerate() {
        if *c != format!("x{}", i + 1) {
            return Err(Error::Parse(format!("expected column x{}, found `{c}`", i + 1)));
        }
    }
    let has_truth = match &cols[y_col + 1..] {
        [] => false,
        ["zeta"] => true,
        rest => return Err(Error::Parse(format!("unexpected trailing columns {rest:?}"))),
    };
    let dim = y_col;
    let mut regs = Vec::new();
    let mut ys = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: column {}: {e}", line + 1, i + 1)))
        };
        for i in 0..dim {
            regs.push(num(i)?);
        }
        ys.push(num(y_col)?);
        if has_truth {
            let l: usize = rec[y_col + 1]
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: zeta: {e}", line + 1)))?;
            labels.push(l);
        }
    }
    let data = Dataset::from_row_major(dim, regs, ys)?;
    if has_truth {
        let s = labels.iter().copied().max().unwrap_or(1);
        data.with_truth(Assignment::from_labels(&labels, s)?)
    } else {
        Ok(data)
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset_csv(fs::File::open(path)?)
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write_dataset_csv(data, &mut f)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SlModel> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_model(model: &SlModel, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string(model)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let d = Dataset::new(vec![vec![1.0, 0.5]], vec![-11.0])
            .unwrap()
            .with_truth(Assignment::from_labels(&[2], 2).unwrap())
            .unwrap();
        assert_eq!(dataset_to_csv_string(&d), "x1,x2,y,zeta\n1.0,0.5,-11.0,2\n");
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(read_dataset_csv("a,y\n1,2\n".as_bytes()).is_err());
        assert!(read_dataset_csv("x1,x2\n1,2\n".as_bytes()).is_err());
        assert!(read_dataset_csv("x1,y,zeta,extra\n1,2,1,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 1..20),
            labeled in any::<bool>(),
        ) {
            let ys: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).filter(|v| v.is_finite()).collect();
            prop_assume!(ys.len() == rows.len());
            let mut d = Dataset::new(rows.clone(), ys).unwrap();
            if labeled {
                let labels: Vec<usize> = (0..rows.len()).map(|k| k % 3 + 1).collect();
                let s = *labels.iter().max().unwrap();
                d = d.with_truth(Assignment::from_labels(&labels, s).unwrap()).unwrap();
            }
            let back = read_dataset_csv(dataset_to_csv_string(&d).as_bytes()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
