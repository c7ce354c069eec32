#pragma once

// Closed-form pieces of the chirped collective Rabi model. All frequencies
// are angular (rad/us), times in us. Every function here is pure.

namespace collrabi {

// Coupling-laser drive of the read step.
struct DriveParams {
  double omega_c = 0.0;  // coupling Rabi frequency, >= 0
  double delta_c = 0.0;  // coupling detuning, signed
  double delta_p = 0.0;  // probe detuning, signed (does not enter the read model)
};

// Parameters of the single-shift retrieval probability.
struct ChirpedOscParams {
  double beta = 0.0;     // envelope rate (1/us)
  double chirp = 0.0;    // chirp coefficient C (1/us)
  double t0 = 0.0;       // envelope center (us)
  double omega_n = 0.0;  // effective Rabi frequency
  double delta = 0.0;    // inhomogeneous shift, signed
};

// Atom numbers and single-atom couplings entering the collective Rabi
// frequency. n_m_prime is the number of ground-state atoms still present.
struct CollectiveSizeParams {
  double n_m = 1.0;
  double n_m_prime = 1.0;
  double eta = 0.0;      // conversion efficiency into the many-atom ground state
  double omega_g = 0.0;  // |g> <-> |r> single-atom Rabi frequency
  double omega = 0.0;    // |e> <-> |r> single-atom Rabi frequency
};

struct CollectiveRabi {
  double full = 0.0;      // both terms
  double detected = 0.0;  // |E_m> <-> |R_m> term only; the one observed in emission
};

void validate(const DriveParams& drive);
void validate(const ChirpedOscParams& p);
void validate(const CollectiveSizeParams& s);

// sqrt(omega_c^2 + delta_c^2); delta_p plays no role.
double effective_rabi(const DriveParams& drive);

// sqrt(delta^2 + omega_n^2).
double total_rabi(const ChirpedOscParams& p);

CollectiveRabi collective_rabi(const CollectiveSizeParams& s);

// sqrt((exp(-C^2 t^2) + 1) / 2), in [1/sqrt(2), 1].
double chirp_factor(double chirp, double t);

// phi(t) = chirp_factor(C, t) * Omega * t.
double chirp_phase(double chirp, double omega, double t);

// Closed-form d(phi)/dt = Omega (1 + e^{-u}(1 - u)) / (2 chirp_factor), u = C^2 t^2.
// Falls from Omega at t = 0 towards Omega / sqrt(2).
double instantaneous_frequency(double chirp, double omega, double t);

// exp(-beta^2 (t - t0)^2) * (1 - cos(phi(t))) with phi driven by total_rabi(p).
double retrieval_probability(const ChirpedOscParams& p, double t);

}  // namespace collrabi
