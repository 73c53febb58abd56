#include "gnse/csvio.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace gnse {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_velocity_csv(const std::string& path, const VelocityField& u, double h) {
  auto out = open_out(path);
  out << "x,y,u1,u2\n";
  for (int i = 0; i < u.n(); ++i)
    for (int j = 0; j < u.n(); ++j)
      out << fmt17(i * h) << ',' << fmt17(j * h) << ',' << fmt17(u.u1(i, j)) << ','
          << fmt17(u.u2(i, j)) << '\n';
}

void write_scalar_csv(const std::string& path, const ScalarField& f, double h) {
  auto out = open_out(path);
  out << "x,y,value\n";
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j)
      out << fmt17(i * h) << ',' << fmt17(j * h) << ',' << fmt17(f.v(i, j)) << '\n';
}

void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& lambdas) {
  auto out = open_out(path);
  out << "k,lambda\n";
  for (int k = 0; k < lambdas.size(); ++k) out << (k + 1) << ',' << fmt17(lambdas[k]) << '\n';
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,k,xi\n";
  for (int n = 0; n <= traj.time.n_steps; ++n)
    for (int k = 0; k < traj.m(); ++k)
      out << fmt17(traj.time.t(n)) << ',' << (k + 1) << ',' << fmt17(traj.xi(n, k)) << '\n';
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,picard_iters,residual,energy,enstrophy\n";
  for (int n = 0; n <= traj.time.n_steps; ++n)
    out << fmt17(traj.time.t(n)) << ',' << traj.picard_iters[n] << ',' << fmt17(traj.residual[n])
        << ',' << fmt17(traj.energy[n]) << ',' << fmt17(traj.enstrophy[n]) << '\n';
}

void write_certificate_csv(const std::string& path, const EnergyCertificate& cert) {
  auto out = open_out(path);
  out << "t,bound_lhs,bound_rhs,margin,pass\n";
  // two rows per time level: the sup bound, then the kernel-weighted bound
  for (std::size_t i = 0; i < cert.sup_rows.size(); ++i) {
    for (const CertificateRow* row : {&cert.sup_rows[i], &cert.integral_rows[i]})
      out << fmt17(row->t) << ',' << fmt17(row->lhs) << ',' << fmt17(row->rhs) << ','
          << fmt17(row->margin) << ',' << (row->pass ? 1 : 0) << '\n';
  }
}

void write_control_log_csv(const std::string& path, const std::vector<ControlIterate>& log) {
  auto out = open_out(path);
  out << "iter,J,grad_norm,step,state_residual\n";
  for (std::size_t i = 0; i < log.size(); ++i)
    out << i << ',' << fmt17(log[i].J) << ',' << fmt17(log[i].grad_norm) << ','
        << fmt17(log[i].step_len) << ',' << fmt17(log[i].state_residual) << '\n';
}

void write_wopt_csv(const std::string& path, const Eigen::MatrixXd& w, double dt) {
  auto out = open_out(path);
  out << "t,comp,value\n";
  for (int j = 0; j < w.rows(); ++j)
    for (int i = 0; i < w.cols(); ++i)
      out << fmt17(j * dt) << ',' << (i + 1) << ',' << fmt17(w(j, i)) << '\n';
}

void write_manifest(const std::string& path, const std::map<std::string, std::string>& entries) {
  nlohmann::ordered_json j;
  for (const auto& [key, value] : entries) {
    try {
      std::size_t pos = 0;
      const double num = std::stod(value, &pos);
      if (pos == value.size()) {
        if (num == std::floor(num) && std::abs(num) < 1e15 &&
            value.find_first_of(".eE") == std::string::npos)
          j[key] = static_cast<long long>(num);
        else
          j[key] = num;
        continue;
      }
    } catch (const std::exception&) {
    }
    j[key] = value;
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace gnse
