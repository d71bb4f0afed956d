//! CSV import/export of nodal fields.
//!
//! One row per node: `coord_1..coord_N, value` (scalar) or
//! `coord_1..coord_N, value_1..value_N` (vector). Values are written in the
//! shortest form that parses back to the same `f64`.

use std::io::{Read, Write};

use super::{DiscretizationError, Field, Mesh, VectorField};

fn header(dim: usize, values: &[String]) -> Vec<String> {
    (1..=dim).map(|d| format!("coord_{d}")).chain(values.iter().cloned()).collect()
}

fn write_rows<W: Write>(
    mesh: &Mesh,
    names: &[String],
    row_values: impl Fn(usize) -> Vec<f64>,
    out: W,
) -> Result<(), DiscretizationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(mesh.dim(), names))?;
    for node in 0..mesh.node_count() {
        let coords = mesh.node_coords(node);
        let record: Vec<String> = coords[..mesh.dim()]
            .iter()
            .chain(row_values(node).iter())
            .map(|v| v.to_string())
            .collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field_csv<W: Write>(field: &Field, out: W) -> Result<(), DiscretizationError> {
    write_rows(field.mesh(), &["value".to_string()], |i| vec![field.values()[i]], out)
}

pub fn write_vector_field_csv<W: Write>(field: &VectorField, out: W) -> Result<(), DiscretizationError> {
    let names: Vec<String> = (1..=field.components()).map(|d| format!("value_{d}")).collect();
    write_rows(field.mesh(), &names, |i| field.at(i).to_vec(), out)
}

/// Parses all rows, checking the coordinate columns against the regenerated mesh.
fn read_rows<R: Read>(input: R, dim: usize, value_cols: usize) -> Result<(Mesh, Vec<f64>), DiscretizationError> {
    let mut r = csv::Reader::from_reader(input);
    let ncols = r.headers()?.len();
    if ncols != dim + value_cols {
        return Err(DiscretizationError::Csv(format!(
            "expected {} columns, found {ncols}",
            dim + value_cols
        )));
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                DiscretizationError::Csv(format!("row {}: cannot parse `{cell}`", line + 2))
            })?;
            if c < dim {
                coords.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let rows = coords.len() / dim;
    let per_axis = (rows as f64).powf(1.0 / dim as f64).round() as usize;
    if per_axis < 3 || per_axis.pow(dim as u32) != rows {
        return Err(DiscretizationError::Csv(format!(
            "{rows} rows is not a tensor grid in dimension {dim}"
        )));
    }
    let mesh = Mesh::new(dim, per_axis - 1)?;
    for node in 0..rows {
        let x = mesh.node_coords(node);
        for d in 0..dim {
            if (coords[node * dim + d] - x[d]).abs() > 1e-9 {
                return Err(DiscretizationError::Csv(format!(
                    "row {}: coordinates do not match the regenerated grid",
                    node + 2
                )));
            }
        }
    }
    Ok((mesh, values))
}

pub fn read_field_csv<R: Read>(input: R, dim: usize) -> Result<Field, DiscretizationError> {
    let (mesh, values) = read_rows(input, dim, 1)?;
    Field::from_values(mesh, values)
}

pub fn read_vector_field_csv<R: Read>(input: R, dim: usize) -> Result<VectorField, DiscretizationError> {
    let (mesh, values) = read_rows(input, dim, dim)?;
    VectorField::from_values(mesh, values)
}
