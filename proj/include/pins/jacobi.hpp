#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pins/errors.hpp"

namespace pins {

// Jacobi-coordinate frame of an N-atom system. Row i (< N-1) of the
// transformation matrix U carries the mass-weighted prefix m_j/m_{1..i}
// followed by -1; the last row is the centre-of-mass row m_j/M_tot.
// det(U) = 1 by construction, and the kinetic energy separates into
// N-1 reduced-mass terms plus the centre-of-mass term.
struct JacobiFrame {
    std::vector<double> masses;          // m_e
    Eigen::MatrixXd u_matrix;            // N x N
    Eigen::MatrixXd u_inverse;           // cached for jacobi_to_lab
    std::vector<double> reduced_masses;  // N-1 entries, m_e
    double total_mass = 0.0;

    int n_atoms() const { return static_cast<int>(masses.size()); }
    int n_vectors() const { return n_atoms() - 1; }
    int fn() const { return 3 * n_vectors(); }  // internal scalar dofs

    // reduced masses repeated once per Cartesian component, in the dof
    // ordering used by the ring-polymer machinery
    std::vector<double> masses_per_dof() const
    {
        std::vector<double> out;
        out.reserve(fn());
        for (double mu : reduced_masses)
            for (int a = 0; a < 3; ++a) out.push_back(mu);
        return out;
    }
};

inline JacobiFrame build_jacobi_frame(const std::vector<double>& masses)
{
    const int n = static_cast<int>(masses.size());
    if (n < 2) throw InvalidInput("build_jacobi_frame: need at least two masses");
    for (double m : masses)
        if (!(m > 0.0)) throw InvalidInput("build_jacobi_frame: masses must be positive");

    JacobiFrame frame;
    frame.masses = masses;

    std::vector<double> prefix(n);  // m_{1..i}
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += masses[i];
        prefix[i] = acc;
    }
    frame.total_mass = prefix[n - 1];

    frame.u_matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n - 1; ++i) {
        for (int j = 0; j <= i; ++j) frame.u_matrix(i, j) = masses[j] / prefix[i];
        frame.u_matrix(i, i + 1) = -1.0;
    }
    for (int j = 0; j < n; ++j) frame.u_matrix(n - 1, j) = masses[j] / frame.total_mass;

    frame.u_inverse = frame.u_matrix.inverse();

    frame.reduced_masses.resize(n - 1);
    for (int i = 0; i < n - 1; ++i)
        frame.reduced_masses[i] = 1.0 / (1.0 / masses[i + 1] + 1.0 / prefix[i]);

    return frame;
}

// (x, R_cm) = (U (x) I_3) r. Rows of `lab` are atom positions.
inline void lab_to_jacobi(const JacobiFrame& frame, const Eigen::MatrixX3d& lab,
                          Eigen::MatrixX3d& jacobi, Eigen::Vector3d& r_cm)
{
    const int n = frame.n_atoms();
    if (lab.rows() != n) throw InvalidInput("lab_to_jacobi: row count != atom count");
    Eigen::MatrixX3d all = frame.u_matrix * lab;
    jacobi = all.topRows(n - 1);
    r_cm = all.row(n - 1).transpose();
}

inline void jacobi_to_lab(const JacobiFrame& frame, const Eigen::MatrixX3d& jacobi,
                          const Eigen::Vector3d& r_cm, Eigen::MatrixX3d& lab)
{
    const int n = frame.n_atoms();
    if (jacobi.rows() != n - 1) throw InvalidInput("jacobi_to_lab: row count != N-1");
    Eigen::MatrixX3d all(n, 3);
    all.topRows(n - 1) = jacobi;
    all.row(n - 1) = r_cm.transpose();
    lab = frame.u_inverse * all;
}

}  // namespace pins
