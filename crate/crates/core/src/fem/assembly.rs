//! Linear (P1) finite elements on the triangulated domain and on its
//! polygonal boundary curve.

use alloc::vec::Vec;

use super::mesh::{Mesh, MIN_TRIANGLE_AREA};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

pub type Element3 = [[f64; 3]; 3];
pub type Element2 = [[f64; 2]; 2];

/// `∫ ∇φᵢ·∇φⱼ` on one triangle.
pub fn element_gradient(p: [[f64; 2]; 3]) -> Result<Element3> {
    let area = triangle_area(p)?;
    // ∇φᵢ = (y_j − y_k, x_k − x_j) / (2 area) for (i, j, k) cyclic
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    Ok(k)
}

/// `∫ φᵢ φⱼ` on one triangle: `area/12 · (1 + δᵢⱼ)`.
pub fn element_mass(p: [[f64; 2]; 3]) -> Result<Element3> {
    let area = triangle_area(p)?;
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    Ok(m)
}

fn triangle_area(p: [[f64; 2]; 3]) -> Result<f64> {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    if !(area >= MIN_TRIANGLE_AREA) {
        return Err(Error::DegenerateTriangle { index: 0, area });
    }
    Ok(area)
}

/// 1-D mass and stiffness `((L/6)[[2,1],[1,2]], (1/L)[[1,−1],[−1,1]])` of a chord.
pub fn edge_matrices(a: [f64; 2], b: [f64; 2]) -> Result<(Element2, Element2)> {
    let len = libm::hypot(b[0] - a[0], b[1] - a[1]);
    if !(len > 0.0) {
        return Err(Error::ZeroLengthEdge { index: 0 });
    }
    let m = [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]];
    let k = [[1.0 / len, -1.0 / len], [-1.0 / len, 1.0 / len]];
    Ok((m, k))
}

/// Domain matrices `(M_dom, A_dom)` with `A_dom = ∫∇u·∇v + uv`.
pub fn assemble_domain(mesh: &Mesh) -> Result<(SparseMatrix, SparseMatrix)> {
    let n = mesh.node_count();
    let cap = 9 * mesh.triangles().len();
    let (mut mass, mut stiff) = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    for (index, t) in mesh.triangles().iter().enumerate() {
        let p = t.map(|i| mesh.nodes()[i]);
        let relabel = |e: Error| match e {
            Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { index, area },
            other => other,
        };
        let g = element_gradient(p).map_err(relabel)?;
        let m = element_mass(p).map_err(relabel)?;
        for a in 0..3 {
            for b in 0..3 {
                mass.push((t[a], t[b], m[a][b]));
                stiff.push((t[a], t[b], g[a][b] + m[a][b]));
            }
        }
    }
    Ok((
        SparseMatrix::from_triplets(n, n, &mass)?,
        SparseMatrix::from_triplets(n, n, &stiff)?,
    ))
}

/// Boundary matrices `(M_bnd, A_bnd)` indexed by position in the boundary loop.
pub fn assemble_boundary(mesh: &Mesh) -> Result<(SparseMatrix, SparseMatrix)> {
    let lp = mesh.boundary_loop();
    let m = lp.len();
    let (mut mass, mut stiff) = (Vec::with_capacity(4 * m), Vec::with_capacity(4 * m));
    for e in 0..m {
        let (i, j) = (e, (e + 1) % m);
        let (me, ke) = edge_matrices(mesh.nodes()[lp[i]], mesh.nodes()[lp[j]])
            .map_err(|_| Error::ZeroLengthEdge { index: e })?;
        let idx = [i, j];
        for a in 0..2 {
            for b in 0..2 {
                mass.push((idx[a], idx[b], me[a][b]));
                stiff.push((idx[a], idx[b], ke[a][b]));
            }
        }
    }
    Ok((
        SparseMatrix::from_triplets(m, m, &mass)?,
        SparseMatrix::from_triplets(m, m, &stiff)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::make_disc_mesh;
    use core::f64::consts::PI;

    const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn reference_triangle() {
        let g = element_gradient(REF).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let m = element_mass(REF).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[i][j] - expect[i][j]).abs() < 1e-15);
                let mij = if i == j { 2.0 } else { 1.0 } / 24.0;
                assert!((m[i][j] - mij).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let p = [[0.3, -0.1], [1.7, 0.4], [0.2, 2.2]];
        for row in element_gradient(p).unwrap() {
            assert!(row.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_element() {
        assert!(element_gradient([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
        assert!(edge_matrices([1.0, 1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn edge_of_length_two() {
        let (m, k) = edge_matrices([0.0, 0.0], [0.0, 2.0]).unwrap();
        assert!((m[0][0] - 2.0 / 3.0).abs() < 1e-15 && (m[0][1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(k, [[0.5, -0.5], [-0.5, 0.5]]);
    }

    #[test]
    fn disc_matrices() {
        for level in 1..=3 {
            let mesh = make_disc_mesh(level).unwrap();
            let (md, ad) = assemble_domain(&mesh).unwrap();
            let (mb, ab) = assemble_boundary(&mesh).unwrap();
            assert!(md.is_symmetric(1e-14) && ad.is_symmetric(1e-14));
            assert!(mb.is_symmetric(1e-14) && ab.is_symmetric(1e-14));
            let ones = vec![1.0; mesh.node_count()];
            assert!((md.quadratic_form(&ones) - mesh.area()).abs() < 1e-12);
            // A_dom·1 is the mass row sum, the gradient part drops out
            let a1 = ad.spmv(&ones).unwrap();
            let m1 = md.spmv(&ones).unwrap();
            assert!(a1.iter().zip(&m1).all(|(a, b)| (a - b).abs() < 1e-12));

            let bones = vec![1.0; mesh.boundary_node_count()];
            assert!(ab.spmv(&bones).unwrap().iter().all(|x| x.abs() < 1e-10));
            let k = 6.0 * crate::fem::mesh::disc_rings(level) as f64;
            let perimeter = 2.0 * k * libm::sin(PI / k);
            assert!((mb.quadratic_form(&bones) - perimeter).abs() < 1e-12);
            assert!(perimeter < 2.0 * PI && 2.0 * PI - perimeter < 0.02);
        }
    }
}
