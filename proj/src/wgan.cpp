#include "stgan/wgan.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "stgan/hist.hpp"

namespace stgan {

namespace {

constexpr char checkpoint_magic[5] = {'S', 'T', 'G', 'A', 'N'};
constexpr std::uint16_t checkpoint_version = 1;

std::string meta_line(const std::string& key, const std::string& value) {
  return key + "=" + value + "\n";
}

std::map<std::string, std::string> parse_metadata(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("checkpoint metadata line lacks '='");
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

const std::string& meta_get(const std::map<std::string, std::string>& meta,
                            const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint metadata missing key: " + key);
  return it->second;
}

void append_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64_le(out, m(r, c));
}

void append_vector(std::string& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64_le(out, v(i));
}

void read_matrix(ByteReader& in, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.f64();
}

void read_vector(ByteReader& in, Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in.f64();
}

}  // namespace

std::string GeneratorCheckpoint::to_bytes() const {
  const MlpConfig& cfg = generator.config();
  std::string meta;
  meta += meta_line("label", std::to_string(label));
  meta += meta_line("tick", std::to_string(tick));
  meta += meta_line("minibatch", std::to_string(minibatch));
  meta += meta_line("epoch", format_double(epoch));
  meta += meta_line("latent_dim", std::to_string(latent.dim));
  meta += meta_line("latent_family", latent.family == LatentFamily::uniform ? "uniform" : "normal");
  meta += meta_line("latent_std", format_double(latent.std));
  meta += meta_line("snap_discrete", snap_discrete ? "1" : "0");
  meta += meta_line("in_width", std::to_string(cfg.in_width));
  {
    std::string hidden;
    for (std::size_t i = 0; i < cfg.hidden_widths.size(); ++i) {
      if (i) hidden += ',';
      hidden += std::to_string(cfg.hidden_widths[i]);
    }
    meta += meta_line("hidden_widths", hidden);
  }
  meta += meta_line("out_width", std::to_string(cfg.out_width));
  meta += meta_line("leaky_alpha", format_double(cfg.leaky_alpha));
  meta += meta_line("batch_norm", cfg.batch_norm ? "1" : "0");
  meta += meta_line("dropout", format_double(cfg.dropout));
  meta += meta_line("l2", format_double(cfg.l2));
  meta += meta_line("output",
                    cfg.output == OutputActivationKind::smirnov ? "smirnov" : "linear");

  std::string out;
  out.append(checkpoint_magic, sizeof(checkpoint_magic));
  put_u16_le(out, checkpoint_version);
  put_u32_le(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  for (const auto& layer : generator.layers()) {
    append_matrix(out, layer.w);
    append_vector(out, layer.b);
    if (layer.bn) {
      append_vector(out, layer.gamma);
      append_vector(out, layer.beta);
      append_vector(out, layer.running_mean);
      append_vector(out, layer.running_var);
    }
  }
  if (cfg.output == OutputActivationKind::smirnov) {
    const auto* acts = generator.output_activations();
    put_u32_le(out, static_cast<std::uint32_t>(acts->size()));
    for (const auto& act : *acts) act.append_bytes(out);
  }
  return out;
}

GeneratorCheckpoint GeneratorCheckpoint::from_bytes(const std::string& bytes) {
  ByteReader in(bytes.data(), bytes.size());
  if (in.bytes(sizeof(checkpoint_magic)) != std::string(checkpoint_magic, sizeof(checkpoint_magic)))
    throw FormatError("checkpoint: bad magic");
  const std::uint16_t version = in.u16();
  if (version != checkpoint_version)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t meta_len = in.u32();
  const auto meta = parse_metadata(in.bytes(meta_len));

  GeneratorCheckpoint ckpt;
  ckpt.label = std::stoi(meta_get(meta, "label"));
  ckpt.tick = std::stoull(meta_get(meta, "tick"));
  ckpt.minibatch = std::stoull(meta_get(meta, "minibatch"));
  ckpt.epoch = std::strtod(meta_get(meta, "epoch").c_str(), nullptr);
  ckpt.latent.dim = std::stoull(meta_get(meta, "latent_dim"));
  ckpt.latent.family = meta_get(meta, "latent_family") == "uniform" ? LatentFamily::uniform
                                                                    : LatentFamily::normal;
  ckpt.latent.std = std::strtod(meta_get(meta, "latent_std").c_str(), nullptr);
  ckpt.snap_discrete = meta_get(meta, "snap_discrete") == "1";

  MlpConfig cfg;
  cfg.in_width = std::stoull(meta_get(meta, "in_width"));
  {
    const std::string& hidden = meta_get(meta, "hidden_widths");
    std::stringstream hs(hidden);
    std::string tok;
    while (std::getline(hs, tok, ','))
      if (!tok.empty()) cfg.hidden_widths.push_back(std::stoull(tok));
  }
  cfg.out_width = std::stoull(meta_get(meta, "out_width"));
  cfg.leaky_alpha = std::strtod(meta_get(meta, "leaky_alpha").c_str(), nullptr);
  cfg.batch_norm = meta_get(meta, "batch_norm") == "1";
  cfg.dropout = std::strtod(meta_get(meta, "dropout").c_str(), nullptr);
  cfg.l2 = std::strtod(meta_get(meta, "l2").c_str(), nullptr);
  cfg.output = meta_get(meta, "output") == "smirnov" ? OutputActivationKind::smirnov
                                                     : OutputActivationKind::linear;

  ckpt.generator = Mlp::init(cfg, 0);
  for (auto& layer : ckpt.generator.layers()) {
    read_matrix(in, layer.w);
    read_vector(in, layer.b);
    if (layer.bn) {
      read_vector(in, layer.gamma);
      read_vector(in, layer.beta);
      read_vector(in, layer.running_mean);
      read_vector(in, layer.running_var);
    }
  }
  if (cfg.output == OutputActivationKind::smirnov) {
    const std::uint32_t n_acts = in.u32();
    if (n_acts != cfg.out_width)
      throw FormatError("checkpoint: activation count does not match output width");
    auto acts = std::make_shared<std::vector<SmirnovActivation>>();
    acts->reserve(n_acts);
    for (std::uint32_t i = 0; i < n_acts; ++i) acts->push_back(SmirnovActivation::from_bytes(in));
    ckpt.generator.set_output_activations(std::move(acts));
  }
  if (in.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  return ckpt;
}

void GeneratorCheckpoint::save(const std::string& path) const {
  write_binary_file(path, to_bytes());
}

GeneratorCheckpoint GeneratorCheckpoint::load(const std::string& path) {
  return from_bytes(read_binary_file(path));
}

std::string TrainTrace::to_csv() const {
  std::ostringstream out;
  out << "tick,minibatch,epoch,critic_loss,gen_loss,l1,jaccard,f1_ds1,f1_ds2\n";
  for (const auto& r : rows) {
    out << r.tick << ',' << r.minibatch << ',' << format_double(r.epoch) << ','
        << format_double(r.critic_loss) << ',' << format_double(r.gen_loss) << ','
        << format_double(r.l1) << ',' << format_double(r.jaccard) << ',';
    if (r.f1_ds1) out << format_double(*r.f1_ds1);
    out << ',';
    if (r.f1_ds2) out << format_double(*r.f1_ds2);
    out << '\n';
  }
  return out.str();
}

namespace {

Matrix draw_latent(const LatentConfig& latent, std::size_t n, RngStream& rng) {
  Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(latent.dim));
  if (latent.family == LatentFamily::uniform) {
    const double a = latent.std * 1.7320508075688772935274463415059;  // std * sqrt(3)
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng.uniform(-a, a);
  } else {
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng.normal(0.0, latent.std);
  }
  return z;
}

Matrix sample_rows(const Matrix& all, std::size_t batch, RngStream& rng) {
  Matrix out(static_cast<Eigen::Index>(batch), all.cols());
  const auto n = static_cast<std::uint64_t>(all.rows());
  for (std::size_t i = 0; i < batch; ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        all.row(static_cast<Eigen::Index>(rng.uniform_index(n)));
  return out;
}

}  // namespace

TrainResult wgan_train(const Matrix& real_rows, int label, const GanConfig& cfg,
                       const TrainSchedule& schedule, const EvalHook& eval_hook) {
  if (real_rows.rows() == 0) throw DataError("wgan_train: no training rows");
  const auto d = static_cast<std::size_t>(real_rows.cols());
  if (cfg.gen.out_width != d)
    throw ConfigError("wgan_train: generator output width must match the feature count");
  if (cfg.critic.in_width != d)
    throw ConfigError("wgan_train: critic input width must match the feature count");
  if (cfg.critic.out_width != 1) throw ConfigError("wgan_train: critic output width must be 1");
  if (cfg.gen.in_width != cfg.latent.dim)
    throw ConfigError("wgan_train: generator input width must match the latent dimension");
  if (schedule.batch_size == 0) throw ConfigError("wgan_train: batch_size must be positive");
  if (schedule.checkpoint_interval == 0)
    throw ConfigError("wgan_train: checkpoint_interval must be positive");
  if (schedule.critic_steps == 0) throw ConfigError("wgan_train: critic_steps must be positive");
  if (schedule.eval_interval != 0 && schedule.eval_interval % schedule.checkpoint_interval != 0)
    throw ConfigError("wgan_train: checkpoint_interval must divide eval_interval");

  Mlp gen = Mlp::init(cfg.gen, derive_seed(schedule.seed, 1));
  Mlp critic = Mlp::init(cfg.critic, derive_seed(schedule.seed, 2));
  if (cfg.gen.output == OutputActivationKind::smirnov) {
    auto acts = std::make_shared<std::vector<SmirnovActivation>>();
    acts->reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> col(static_cast<std::size_t>(real_rows.rows()));
      for (Eigen::Index r = 0; r < real_rows.rows(); ++r)
        col[static_cast<std::size_t>(r)] = real_rows(r, static_cast<Eigen::Index>(j));
      acts->push_back(SmirnovActivation::build(col, cfg.smirnov_knots, cfg.smirnov_clip));
    }
    gen.set_output_activations(std::move(acts));
  }

  RngStream batch_rng(derive_seed(schedule.seed, 3));
  RngStream latent_rng(derive_seed(schedule.seed, 4));
  RngStream gen_dropout_rng(derive_seed(schedule.seed, 5));
  RngStream critic_dropout_rng(derive_seed(schedule.seed, 6));

  OptimizerState gen_state(gen);
  OptimizerState critic_state(critic);

  const auto n_real = static_cast<std::size_t>(real_rows.rows());
  const std::size_t mpe =
      (n_real + schedule.batch_size - 1) / schedule.batch_size;  // minibatches per epoch
  const double inv_batch = 1.0 / static_cast<double>(schedule.batch_size);

  TrainResult result;
  result.trace.minibatches_per_epoch = mpe;

  auto snapshot = [&](std::uint64_t tick, std::uint64_t minibatch) {
    GeneratorCheckpoint ckpt;
    ckpt.tick = tick;
    ckpt.minibatch = minibatch;
    ckpt.epoch = static_cast<double>(minibatch) / static_cast<double>(mpe);
    ckpt.label = label;
    ckpt.generator = gen;
    ckpt.latent = cfg.latent;
    ckpt.snap_discrete = cfg.snap_discrete;
    return ckpt;
  };

  result.checkpoints.push_back(snapshot(0, 0));
  if (schedule.total_minibatches == 0) return result;

  // real and fake rows always share one critic batch: with separate passes,
  // train-mode batch norm standardizes each group on its own and erases any
  // difference in location or scale between them, which is exactly what the
  // critic has to score
  const auto nb = static_cast<Eigen::Index>(schedule.batch_size);
  auto stack = [&](const Matrix& top, const Matrix& bottom) {
    Matrix joint(top.rows() + bottom.rows(), top.cols());
    joint.topRows(top.rows()) = top;
    joint.bottomRows(bottom.rows()) = bottom;
    return joint;
  };
  Matrix upstream_critic(2 * nb, 1);
  upstream_critic.topRows(nb).setConstant(inv_batch);      // push fake scores down
  upstream_critic.bottomRows(nb).setConstant(-inv_batch);  // push real scores up
  Matrix upstream_gen(2 * nb, 1);
  upstream_gen.topRows(nb).setConstant(-inv_batch);  // pull fake scores up
  upstream_gen.bottomRows(nb).setZero();             // anchor rows only set the statistics

  double acc_critic_loss = 0.0;
  double acc_gen_loss = 0.0;
  std::size_t acc_count = 0;

  for (std::size_t m = 1; m <= schedule.total_minibatches; ++m) {
    double critic_loss = 0.0;
    for (std::size_t c = 0; c < schedule.critic_steps; ++c) {
      const Matrix real_batch = sample_rows(real_rows, schedule.batch_size, batch_rng);
      const Matrix z = draw_latent(cfg.latent, schedule.batch_size, latent_rng);
      const Matrix fake = gen.forward(z, Mode::train, &gen_dropout_rng, nullptr, false);

      ForwardCache cache;
      const Matrix out =
          critic.forward(stack(fake, real_batch), Mode::train, &critic_dropout_rng, &cache, true);
      critic_loss = out.topRows(nb).mean() - out.bottomRows(nb).mean();

      const Gradients grads = critic.backward(cache, upstream_critic);
      critic_state.step(critic, grads, cfg.critic_opt);
    }

    const Matrix real_anchor = sample_rows(real_rows, schedule.batch_size, batch_rng);
    const Matrix z = draw_latent(cfg.latent, schedule.batch_size, latent_rng);
    ForwardCache gen_cache;
    const Matrix fake = gen.forward(z, Mode::train, &gen_dropout_rng, &gen_cache, true);
    ForwardCache critic_cache;
    const Matrix out = critic.forward(stack(fake, real_anchor), Mode::train, &critic_dropout_rng,
                                      &critic_cache, false);
    const double gen_loss = -out.topRows(nb).mean();
    const Gradients critic_grads = critic.backward(critic_cache, upstream_gen);
    const Gradients gen_grads = gen.backward(gen_cache, critic_grads.input.topRows(nb));
    gen_state.step(gen, gen_grads, cfg.gen_opt);

    if (!std::isfinite(critic_loss) || !std::isfinite(gen_loss))
      throw NumericError("wgan_train: non-finite loss at minibatch " + std::to_string(m));

    acc_critic_loss += critic_loss;
    acc_gen_loss += gen_loss;
    ++acc_count;

    if (m % schedule.checkpoint_interval == 0) {
      const std::uint64_t tick = m / schedule.checkpoint_interval;
      GeneratorCheckpoint ckpt = snapshot(tick, m);

      const std::size_t n_metric =
          schedule.metric_samples > 0 ? schedule.metric_samples : n_real;
      const Matrix synth = generate_rows(ckpt, n_metric, derive_seed(schedule.seed, 10000 + tick));
      const HistMetricPair hm = compute_hist_metrics(real_rows, synth, schedule.metric_bins);

      TraceRow row;
      row.tick = tick;
      row.minibatch = m;
      row.epoch = ckpt.epoch;
      row.critic_loss = acc_critic_loss / static_cast<double>(acc_count);
      row.gen_loss = acc_gen_loss / static_cast<double>(acc_count);
      row.l1 = hm.l1;
      row.jaccard = hm.jaccard;
      if (schedule.eval_interval != 0 && m % schedule.eval_interval == 0 && eval_hook) {
        const auto [f1_ds1, f1_ds2] = eval_hook(ckpt);
        row.f1_ds1 = f1_ds1;
        row.f1_ds2 = f1_ds2;
      }
      result.trace.rows.push_back(row);
      result.checkpoints.push_back(std::move(ckpt));
      acc_critic_loss = 0.0;
      acc_gen_loss = 0.0;
      acc_count = 0;
    }
  }
  return result;
}

Matrix generate_rows(const GeneratorCheckpoint& ckpt, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("generate_rows: n must be positive");
  RngStream rng(seed);
  const Matrix z = draw_latent(ckpt.latent, n, rng);
  Mlp gen = ckpt.generator;  // inference still goes through the mutable API
  Matrix rows = gen.forward(z, Mode::infer, nullptr, nullptr, false);
  if (ckpt.snap_discrete && gen.output_activations()) {
    const auto& acts = *gen.output_activations();
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const auto& act = acts[static_cast<std::size_t>(c)];
      if (!act.is_discrete()) continue;
      for (Eigen::Index r = 0; r < rows.rows(); ++r) rows(r, c) = act.snap(rows(r, c));
    }
  }
  return rows;
}

Matrix mean_baseline_rows(const Matrix& real_rows, std::size_t n, std::uint64_t seed,
                          double noise_scale) {
  if (real_rows.rows() < 2) throw DataError("mean_baseline_rows: need at least 2 training rows");
  RngStream rng(seed);
  const Vector mean = real_rows.colwise().mean().transpose();
  Vector sd(real_rows.cols());
  for (Eigen::Index j = 0; j < real_rows.cols(); ++j) {
    const double m = mean(j);
    double ss = 0.0;
    for (Eigen::Index r = 0; r < real_rows.rows(); ++r) {
      const double dv = real_rows(r, j) - m;
      ss += dv * dv;
    }
    sd(j) = std::sqrt(ss / static_cast<double>(real_rows.rows() - 1));
  }
  Matrix out(static_cast<Eigen::Index>(n), real_rows.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(r, j) = mean(j) + noise_scale * sd(j) * rng.normal();
  return out;
}

}  // namespace stgan
