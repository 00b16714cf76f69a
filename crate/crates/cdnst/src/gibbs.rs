//! Pointwise Gibbs sampler for the cross-domain novelty-seeking model.
//!
//! One sweep runs the six-step schedule: resample every source-domain level,
//! resample the shared `theta`, take one Metropolis-Hastings step on the
//! source utilities `phi^s`, then the same three steps for the target. With a
//! single domain the schedule collapses to the three-step single-domain
//! sampler (NSM).
//!
//! `theta` is the one node shared between domains, so both `theta` steps
//! count level occurrences from *all* domains; counting only the local domain
//! would decouple the chains and defeat the transfer mechanism.
//!
//! The `phi` conditional is non-conjugate (the likelihood carries `phi` in a
//! position-dependent denominator), so it is updated by one MH step per sweep
//! with a Dirichlet proposal centered at the current value. The level
//! conditional exists in two forms behind [`ZConditionalMode`]: the
//! procedure-faithful form `theta_z * phi_x * f(z, rank_x)`, and an `Exact`
//! form that multiplies in the full conditional action likelihood including
//! its z-dependent row normalizer.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dcn::{DcnMatrix, DcnRow};
use crate::domain::{ActionSequence, Hyperparams};
use crate::error::{Error, Result};
use crate::genmodel::{action_function, nst, UserModelState};
use crate::rng::{sample_categorical, sample_dirichlet};

/// Which level conditional the z-sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZConditionalMode {
    /// `theta_z * phi_x * f(z, rank_x)` exactly as the schedule writes it.
    #[default]
    PaperFaithful,
    /// Multiplies in the full action likelihood including its z-dependent
    /// denominator `sum_j phi_j * f(z, rank_j)`.
    Exact,
}

/// Sweep counts, proposal tuning, and seeding for one sampler run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub thin: usize,
    /// Per-choice proposal concentration factor; the effective Dirichlet
    /// concentration is `c * M` for a domain with M choices.
    pub phi_proposal_concentration: f64,
    pub z_conditional_mode: ZConditionalMode,
    pub seed: u64,
    /// Retain per-sweep states in the result (memory-heavy; off by default).
    pub keep_states: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            burn_in: 500,
            samples: 200,
            thin: 2,
            phi_proposal_concentration: 500.0,
            z_conditional_mode: ZConditionalMode::default(),
            seed: 0,
            keep_states: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        if self.thin < 1 {
            return Err(Error::InvalidConfig("thin must be >= 1".into()));
        }
        if !(self.phi_proposal_concentration > 0.0) {
            return Err(Error::InvalidConfig(
                "phi proposal concentration must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Elementwise floor added to Dirichlet proposal concentrations.
const PROPOSAL_EPS: f64 = 1e-3;

/// Per-sweep diagnostics captured during a fit.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// MH acceptance rate of the `phi` step, one entry per domain.
    pub phi_acceptance: Vec<f64>,
    /// Log joint density of the chain state after each sweep.
    pub log_joint: Vec<f64>,
}

/// A retained post-burn-in chain state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetainedState {
    pub theta: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub z: Vec<Vec<u32>>,
}

/// Posterior summaries from one sampler run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub k: usize,
    pub posterior_mean_theta: Vec<f64>,
    /// Posterior mean utilities, one vector per fitted domain in input order
    /// (source first for cross-domain fits).
    pub posterior_mean_phi: Vec<Vec<f64>>,
    pub nst_estimate: f64,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub retained: Option<Vec<RetainedState>>,
}

impl FitResult {
    /// Source-domain posterior mean utilities (first fitted domain).
    pub fn phi_source(&self) -> &[f64] {
        &self.posterior_mean_phi[0]
    }

    /// Target-domain posterior mean utilities (last fitted domain).
    pub fn phi_target(&self) -> &[f64] {
        self.posterior_mean_phi.last().expect("at least one domain")
    }
}

/// One domain's observations as seen by the sampler.
#[derive(Clone, Copy)]
pub struct DomainData<'a> {
    pub seq: &'a ActionSequence,
    pub dcn: &'a DcnMatrix,
    pub alpha: &'a [f64],
}

impl<'a> DomainData<'a> {
    fn check(&self) -> Result<()> {
        self.seq.require_fittable()?;
        if self.dcn.n() != self.seq.n() {
            return Err(Error::InvalidConfig(format!(
                "DCN has {} rows but sequence has {} actions",
                self.dcn.n(),
                self.seq.n()
            )));
        }
        if self.alpha.len() != self.dcn.m() {
            return Err(Error::InvalidConfig(format!(
                "alpha has length {} but catalog has {} choices",
                self.alpha.len(),
                self.dcn.m()
            )));
        }
        Ok(())
    }
}

/// Unnormalized level weights for one position.
///
/// `x` is the observed choice at the position and `row` its rank row. In
/// `Exact` mode the full conditional action likelihood is multiplied in.
pub fn z_weights(
    mode: ZConditionalMode,
    theta: &[f64],
    phi: &[f64],
    row: &DcnRow,
    x: usize,
) -> Vec<f64> {
    let k = theta.len();
    (1..=k as u32)
        .map(|z| {
            let f_obs = action_function(z, row.ranks[x], row.row_max, k);
            let base = theta[z as usize - 1] * phi[x] * f_obs;
            match mode {
                ZConditionalMode::PaperFaithful => base,
                ZConditionalMode::Exact => {
                    let denom: f64 = phi
                        .iter()
                        .zip(&row.ranks)
                        .map(|(&p, &r)| p * action_function(z, r, row.row_max, k))
                        .sum();
                    base / denom
                }
            }
        })
        .collect()
}

/// Draw one level from its conditional. Returns a level in `1..=K`.
pub fn sample_z<R: Rng + ?Sized>(
    mode: ZConditionalMode,
    theta: &[f64],
    phi: &[f64],
    row: &DcnRow,
    x: usize,
    rng: &mut R,
) -> u32 {
    let w = z_weights(mode, theta, phi, row, x);
    sample_categorical(rng, &w) as u32 + 1
}

/// Draw the shared `theta` from `Dirichlet(beta + n)` where `n_k` counts
/// occurrences of level `k` across all provided level vectors.
pub fn sample_theta<R: Rng + ?Sized>(
    levels: &[&[u32]],
    beta: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let posterior = theta_posterior_concentration(levels, beta);
    sample_dirichlet(rng, &posterior)
}

/// `beta + n`: the concentration vector of theta's full conditional.
pub fn theta_posterior_concentration(levels: &[&[u32]], beta: &[f64]) -> Vec<f64> {
    let mut out = beta.to_vec();
    for zs in levels {
        for &z in *zs {
            out[z as usize - 1] += 1.0;
        }
    }
    out
}

/// Log density of `Dirichlet(alpha)` at `x` (x on the simplex).
fn ln_dirichlet_pdf(x: &[f64], alpha: &[f64]) -> f64 {
    let mut lp = ln_gamma(alpha.iter().sum());
    for (&xi, &ai) in x.iter().zip(alpha) {
        lp -= ln_gamma(ai);
        lp += (ai - 1.0) * xi.max(f64::MIN_POSITIVE).ln();
    }
    lp
}

/// Log target density of the `phi` conditional for one domain:
/// `sum_{i=2..N} [ln phi_{x_i} + ln f_i - ln sum_j phi_j f_ij] + ln Dir(phi | alpha)`.
///
/// The likelihood product starts at the second position; the first action has
/// no predecessor and its uniform rank row cancels out of the conditional.
pub fn phi_log_target(
    phi: &[f64],
    items: &[usize],
    dcn: &DcnMatrix,
    z: &[u32],
    alpha: &[f64],
    k: usize,
) -> f64 {
    let mut lp = ln_dirichlet_pdf(phi, alpha);
    for i in 1..items.len() {
        let row = dcn.row(i);
        let zi = z[i];
        let f_obs = action_function(zi, row.ranks[items[i]], row.row_max, k);
        let denom: f64 = phi
            .iter()
            .zip(&row.ranks)
            .map(|(&p, &r)| p * action_function(zi, r, row.row_max, k))
            .sum();
        lp += (phi[items[i]].max(f64::MIN_POSITIVE)).ln() + f_obs.ln() - denom.ln();
    }
    lp
}

/// One Metropolis-Hastings step on `phi` with a Dirichlet proposal centered
/// at the current value (concentration `c_eff * phi + eps`). Returns the new
/// value (the current one on rejection) and whether the move was accepted.
pub fn sample_phi<R: Rng + ?Sized>(
    phi: &[f64],
    items: &[usize],
    dcn: &DcnMatrix,
    z: &[u32],
    alpha: &[f64],
    k: usize,
    c_eff: f64,
    rng: &mut R,
) -> (Vec<f64>, bool) {
    let conc_fwd: Vec<f64> = phi.iter().map(|&p| c_eff * p + PROPOSAL_EPS).collect();
    let proposal = sample_dirichlet(rng, &conc_fwd);
    let conc_rev: Vec<f64> = proposal.iter().map(|&p| c_eff * p + PROPOSAL_EPS).collect();

    let log_target_cur = phi_log_target(phi, items, dcn, z, alpha, k);
    let log_target_new = phi_log_target(&proposal, items, dcn, z, alpha, k);
    // Asymmetric proposal correction: q(old | new) - q(new | old).
    let log_q_fwd = ln_dirichlet_pdf(&proposal, &conc_fwd);
    let log_q_rev = ln_dirichlet_pdf(phi, &conc_rev);
    let log_accept = log_target_new - log_target_cur + log_q_rev - log_q_fwd;

    if log_accept >= 0.0 || rng.random::<f64>().ln() < log_accept {
        (proposal, true)
    } else {
        (phi.to_vec(), false)
    }
}

struct ChainDomain {
    items: Vec<usize>,
    phi: Vec<f64>,
    z: Vec<u32>,
    accepted: usize,
}

/// Fit the model on one or more domains sharing a single `theta`.
///
/// Domains are given in schedule order (source first); the six-step schedule
/// degenerates gracefully to the single-domain sampler when one domain is
/// provided. Fully deterministic given the config seed.
pub fn fit(domains: &[DomainData<'_>], k: usize, beta: &[f64], cfg: &SamplerConfig) -> Result<FitResult> {
    cfg.validate()?;
    if domains.is_empty() {
        return Err(Error::InvalidConfig("no domains to fit".into()));
    }
    if k < 1 || beta.len() != k {
        return Err(Error::InvalidConfig(format!(
            "beta length {} does not match K = {k}",
            beta.len()
        )));
    }
    for d in domains {
        d.check()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta = sample_dirichlet(&mut rng, beta);
    let mut chains: Vec<ChainDomain> = domains
        .iter()
        .map(|d| ChainDomain {
            items: d.seq.choice_indices(),
            phi: sample_dirichlet(&mut rng, d.alpha),
            z: (0..d.seq.n())
                .map(|_| rng.random_range(1..=k as u32))
                .collect(),
            accepted: 0,
        })
        .collect();

    let total_sweeps = cfg.burn_in + cfg.samples * cfg.thin;
    let mut log_joint = Vec::with_capacity(total_sweeps);
    let mut sum_theta = vec![0.0; k];
    let mut sum_phi: Vec<Vec<f64>> = domains.iter().map(|d| vec![0.0; d.alpha.len()]).collect();
    let mut retained = cfg.keep_states.then(Vec::new);
    let mut kept = 0usize;

    for sweep in 0..total_sweeps {
        for (di, d) in domains.iter().enumerate() {
            let chain = &mut chains[di];
            for i in 0..chain.items.len() {
                chain.z[i] = sample_z(
                    cfg.z_conditional_mode,
                    &theta,
                    &chain.phi,
                    d.dcn.row(i),
                    chain.items[i],
                    &mut rng,
                );
            }
            let level_views: Vec<&[u32]> = chains.iter().map(|c| c.z.as_slice()).collect();
            theta = sample_theta(&level_views, beta, &mut rng);
            let chain = &mut chains[di];
            let c_eff = cfg.phi_proposal_concentration * d.alpha.len() as f64;
            let (phi, accepted) = sample_phi(
                &chain.phi,
                &chain.items,
                d.dcn,
                &chain.z,
                d.alpha,
                k,
                c_eff,
                &mut rng,
            );
            chain.phi = phi;
            chain.accepted += usize::from(accepted);
        }

        let lj = {
            let mut lp = ln_dirichlet_pdf(&theta, beta);
            for (di, d) in domains.iter().enumerate() {
                let chain = &chains[di];
                lp += chain
                    .z
                    .iter()
                    .map(|&z| theta[z as usize - 1].max(f64::MIN_POSITIVE).ln())
                    .sum::<f64>();
                lp += phi_log_target(&chain.phi, &chain.items, d.dcn, &chain.z, d.alpha, k);
            }
            lp
        };
        log_joint.push(lj);

        if sweep >= cfg.burn_in && (sweep - cfg.burn_in + 1) % cfg.thin == 0 && kept < cfg.samples
        {
            kept += 1;
            for (s, t) in sum_theta.iter_mut().zip(&theta) {
                *s += t;
            }
            for (sp, chain) in sum_phi.iter_mut().zip(&chains) {
                for (s, p) in sp.iter_mut().zip(&chain.phi) {
                    *s += p;
                }
            }
            if let Some(states) = retained.as_mut() {
                states.push(RetainedState {
                    theta: theta.clone(),
                    phi: chains.iter().map(|c| c.phi.clone()).collect(),
                    z: chains.iter().map(|c| c.z.clone()).collect(),
                });
            }
        }
    }

    debug_assert_eq!(kept, cfg.samples);
    let norm = kept as f64;
    sum_theta.iter_mut().for_each(|x| *x /= norm);
    sum_phi
        .iter_mut()
        .for_each(|p| p.iter_mut().for_each(|x| *x /= norm));
    // Renormalize posterior means so serialization round-trips stay on the
    // simplex despite accumulated float error.
    renormalize(&mut sum_theta);
    sum_phi.iter_mut().for_each(|p| renormalize(p));

    let nst_estimate = nst(&sum_theta);
    Ok(FitResult {
        k,
        nst_estimate,
        posterior_mean_theta: sum_theta,
        posterior_mean_phi: sum_phi,
        diagnostics: Diagnostics {
            phi_acceptance: chains
                .iter()
                .map(|c| c.accepted as f64 / total_sweeps as f64)
                .collect(),
            log_joint,
        },
        retained,
    })
}

fn renormalize(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
    }
}

/// Cross-domain fit: source and target share `theta` (CDNST).
pub fn fit_cross(
    seq_s: &ActionSequence,
    dcn_s: &DcnMatrix,
    seq_t: &ActionSequence,
    dcn_t: &DcnMatrix,
    hp: &Hyperparams,
    cfg: &SamplerConfig,
) -> Result<FitResult> {
    hp.validate()?;
    fit(
        &[
            DomainData { seq: seq_s, dcn: dcn_s, alpha: &hp.alpha_s },
            DomainData { seq: seq_t, dcn: dcn_t, alpha: &hp.alpha_t },
        ],
        hp.k,
        &hp.beta,
        cfg,
    )
}

/// Single-domain fit (NSM): the schedule reduces to z-sweep, theta, phi.
pub fn fit_single(
    seq: &ActionSequence,
    dcn: &DcnMatrix,
    alpha: &[f64],
    k: usize,
    beta: &[f64],
    cfg: &SamplerConfig,
) -> Result<FitResult> {
    fit(&[DomainData { seq, dcn, alpha }], k, beta, cfg)
}

/// View a two-domain retained state as a [`UserModelState`].
pub fn retained_to_state(r: &RetainedState) -> UserModelState {
    UserModelState {
        theta: r.theta.clone(),
        phi_s: r.phi.first().cloned().unwrap_or_default(),
        phi_t: r.phi.last().cloned().unwrap_or_default(),
        z_s: r.z.first().cloned().unwrap_or_default(),
        z_t: r.z.last().cloned().unwrap_or_default(),
    }
}
