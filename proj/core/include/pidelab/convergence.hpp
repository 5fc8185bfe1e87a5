#pragma once

#include <string>

#include "pidelab/stability_lab.hpp"

namespace pidelab {

/// Node-load provider F_i(t) = (du/dt(t,.), phi_i)_H + a_t(u(t,.), phi_i)
/// manufactured from an exact solution; feeding it to the stepper makes
/// the exact solution solve the semi-discrete problem up to quadrature.
std::function<Vector(double)> manufacture_node_load(const GalerkinSpace& space,
                                                    const LevyModel& model,
                                                    const ExactSolution& exact);

enum class Coupling { refine_h_only, refine_dt_only, joint };

struct StudyConfig {
    Domain1D domain;
    int degree;
    double eta = 0.0;
    double rho = 1.0;
    LevyModel model;
    ExactSolution exact;
    double theta;
    std::vector<int> n_levels;  // elements per level (h axis)
    std::vector<int> m_levels;  // time steps per level (dt axis)
    Coupling coupling = Coupling::joint;
    bool enforce_condition = true;
    /// Aborts with a diagnostic if the projection of the initial data
    /// fails its approximation rate (only meaningful when h is refined).
    bool projection_gate = true;
};

struct ConvergenceRow {
    double h;
    double dt;
    double err_H_final;
    double err_energy_sum;
    double err_V_sum;
};

/// Rates are fitted against h when h is refined (h-only and joint) and
/// against dt otherwise; axis records which. The coarsest level is
/// dropped from a fit when its residual exceeds 0.05.
struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::string axis;  // "h" or "dt"
    RateFit err_H_rate;
    RateFit err_energy_rate;
    RateFit err_V_rate;
};

ConvergenceReport run_study(const StudyConfig& config);

}  // namespace pidelab
