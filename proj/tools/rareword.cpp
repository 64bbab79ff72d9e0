// rareword: corpus annotation, dictionary building and OOV post-processing.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rareword/rareword.hpp"

namespace {

using namespace rareword;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// CLI flags that override config keys, plus the config and manifest paths.
struct Overrides {
  std::string config_path;
  std::string manifest_path;
  std::vector<std::pair<CLI::Option*, std::string>> options;
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> paths;

  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
  {
    auto* opt = app->add_option(flag, values[key], help);
    options.emplace_back(opt, key);
    return opt;
  }

  CLI::Option* path(CLI::App* app, const std::string& flag, const std::string& help, bool required = false)
  {
    auto* opt = app->add_option(flag, paths[flag.substr(2)], help);
    if (required) opt->required();
    return opt;
  }

  const std::string& operator[](const std::string& name) const { return paths.at(name); }

  bool has(const std::string& name) const
  {
    const auto it = paths.find(name);
    return it != paths.end() && !it->second.empty();
  }

  void add_common(CLI::App* app)
  {
    app->add_option("--config", config_path, "flat key = value config file; CLI flags override it");
    app->add_option("--manifest", manifest_path, "write the fully resolved config here");
  }

  PipelineConfig resolve(const std::string& command) const
  {
    PipelineConfig cfg;
    if (!config_path.empty()) {
      io::Input in(config_path);
      cfg.load(in.stream());
    }
    for (const auto& [opt, key] : options)
      if (opt->count() > 0) cfg.set(key, values.at(key));
    if (!manifest_path.empty()) {
      io::Output out(manifest_path);
      out.stream() << "# rareword " << command << '\n';
      cfg.write(out.stream());
      for (const auto& [name, p] : paths)
        if (!p.empty()) out.stream() << "# path." << name << " = " << p << '\n';
      out.close();
    }
    return cfg;
  }
};

TokenizeMode tokenize_mode(const PipelineConfig& cfg)
{
  return cfg.tokenize == "aggressive" ? TokenizeMode::Aggressive : TokenizeMode::Whitespace;
}

std::vector<std::string> split_specials(const std::string& s)
{
  std::vector<std::string> out;
  for (const auto part : io::split(s, ','))
    if (!part.empty()) out.emplace_back(part);
  return out;
}

Vocabulary load_vocab(const std::string& path, const std::vector<std::string>& specials)
{
  io::Input in(path);
  try {
    return read_vocabulary(in.stream(), specials);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

TranslationDictionary load_dict(const std::string& path)
{
  io::Input in(path);
  try {
    return read_dictionary(in.stream());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<Sentence> read_sentences(const std::string& path, TokenizeMode mode, bool allow_blank)
{
  io::Input in(path);
  std::vector<Sentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (io::read_line(in.stream(), line)) {
    ++lineno;
    try {
      out.push_back(allow_blank ? tokenize_output(line, mode) : tokenize(line, mode));
    } catch (const DataError& e) {
      throw DataError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<SentencePair> read_corpus(const std::string& src, const std::string& tgt, TokenizeMode mode)
{
  io::Input s(src), t(tgt);
  try {
    return read_parallel(s.stream(), t.stream(), mode);
  } catch (const DataError& e) {
    throw DataError(src + " / " + tgt + ": " + e.what());
  }
}

std::vector<AlignmentLinks> read_alignments(const std::string& path)
{
  io::Input in(path);
  std::vector<AlignmentLinks> out;
  std::string line;
  std::size_t lineno = 0;
  while (io::read_line(in.stream(), line)) {
    ++lineno;
    try {
      out.push_back(parse_pharaoh(line));
    } catch (const DataError& e) {
      throw DataError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct Command {
  CLI::App* app;
  Overrides flags;
  std::function<void(const Overrides&)> run;
};

void setup_build_vocab(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("build-vocab", "top-K vocabulary with a word<TAB>count sidecar");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--input", "tokenized corpus side", true);
  f.path(app, "--output", "vocabulary file", true);
  f.path(app, "--counts", "counts sidecar (default: OUTPUT.counts)");
  static std::string side = "target";
  static std::string specials = std::string(kUnk);
  app->add_option("--side", side, "which config size applies (source|target)")
    ->check(CLI::IsMember({"source", "target"}));
  app->add_option("--specials", specials, "comma-separated special tokens with the lowest ids");
  static std::string size;
  auto* size_opt = app->add_option("--size", size, "vocabulary size K");
  f.add(app, "--tokenize", "tokenize", "whitespace|aggressive");
  c.run = [size_opt](const Overrides& o) {
    PipelineConfig cfg = o.resolve("build-vocab");
    if (size_opt->count() > 0) cfg.set(side == "source" ? "src_vocab_size" : "tgt_vocab_size", size);
    const std::uint64_t k = side == "source" ? cfg.src_vocab_size : cfg.tgt_vocab_size;

    WordCounter counter;
    {
      io::Input in(o["input"]);
      std::string line;
      std::size_t lineno = 0;
      while (io::read_line(in.stream(), line)) {
        ++lineno;
        try {
          const Sentence s = tokenize(line, tokenize_mode(cfg));
          check_no_reserved(s);
          counter.add(s);
        } catch (const DataError& e) {
          throw DataError(o["input"] + " line " + std::to_string(lineno) + ": " + e.what());
        }
      }
    }
    const auto built = build_vocab(counter, k, split_specials(specials));
    io::Output vout(o["output"]);
    write_vocabulary(vout.stream(), built.vocab);
    vout.close();
    io::Output cout_(o.has("counts") ? o["counts"] : o["output"] + ".counts");
    write_counts(cout_.stream(), built.counts);
    cout_.close();
    std::cerr << "build-vocab: " << built.vocab.words().size() << " words of " << built.counts.size()
              << " types\n";
  };
}

void setup_filter(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("filter", "drop pairs where either side exceeds max-len tokens");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--src", "source side", true);
  f.path(app, "--tgt", "target side", true);
  f.path(app, "--out-src", "filtered source", true);
  f.path(app, "--out-tgt", "filtered target", true);
  f.path(app, "--align", "optional alignment file kept in step");
  f.path(app, "--out-align", "filtered alignment file");
  f.add(app, "--max-len", "max_len", "maximum tokens per side");
  f.add(app, "--tokenize", "tokenize", "whitespace|aggressive");
  c.run = [](const Overrides& o) {
    const PipelineConfig cfg = o.resolve("filter");
    if (o.has("align") != o.has("out-align"))
      throw UsageError("--align and --out-align go together");
    io::Input s(o["src"]), t(o["tgt"]);
    io::Output os(o["out-src"]), ot(o["out-tgt"]);
    std::optional<io::Input> a;
    std::optional<io::Output> oa;
    if (o.has("align")) {
      a.emplace(o["align"]);
      oa.emplace(o["out-align"]);
    }
    std::string ls, lt, la;
    std::uint64_t line = 0, dropped = 0;
    for (;;) {
      const bool hs = io::read_line(s.stream(), ls);
      const bool ht = io::read_line(t.stream(), lt);
      const bool ha = a ? io::read_line(a->stream(), la) : hs;
      if (!hs && !ht && (!a || !ha)) break;
      ++line;
      if (hs != ht || (a && ha != hs))
        throw DataError("inputs differ in length at line " + std::to_string(line));
      try {
        const SentencePair p{tokenize(ls, tokenize_mode(cfg)), tokenize(lt, tokenize_mode(cfg))};
        if (!within_length(p, cfg.max_len)) {
          ++dropped;
          continue;
        }
      } catch (const DataError& e) {
        throw DataError("line " + std::to_string(line) + ": " + e.what());
      }
      os.stream() << ls << '\n';
      ot.stream() << lt << '\n';
      if (oa) oa->stream() << la << '\n';
    }
    os.close();
    ot.close();
    if (oa) oa->close();
    std::cerr << "filter: kept " << line - dropped << " dropped " << dropped << '\n';
  };
}

void setup_align(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("align", "IBM Model 1 alignment, or validate an external alignment file");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--src", "source side");
  f.path(app, "--tgt", "target side");
  f.path(app, "--output", "Pharaoh alignment output (default stdout)");
  f.path(app, "--ttable", "write the forward t(f|e) table here");
  f.path(app, "--import", "external Pharaoh file to validate and pass through");
  static std::vector<std::string> validate;
  app->add_option("--validate", validate, "SRC TGT files the imported links must fit")->expected(2);
  f.add(app, "--iters", "iterations", "EM iterations");
  f.add(app, "--sym", "symmetrize", "intersection|union|forward|backward");
  f.add(app, "--tokenize", "tokenize", "whitespace|aggressive");
  c.run = [](const Overrides& o) {
    const PipelineConfig cfg = o.resolve("align");
    io::Output out(o.has("output") ? o["output"] : "-");
    if (o.has("import")) {
      if (validate.size() != 2)
        throw UsageError("--import needs --validate SRC TGT");
      const auto corpus = read_corpus(validate[0], validate[1], tokenize_mode(cfg));
      const auto links = read_alignments(o["import"]);
      if (links.size() != corpus.size())
        throw DataError(o["import"] + " has " + std::to_string(links.size()) + " lines but the corpus has " +
                        std::to_string(corpus.size()));
      for (std::size_t k = 0; k < links.size(); ++k) {
        try {
          links[k].check_bounds(corpus[k].source.size(), corpus[k].target.size());
        } catch (const DataError& e) {
          throw DataError(o["import"] + " line " + std::to_string(k + 1) + ": " + e.what());
        }
        out.stream() << format_pharaoh(links[k]) << '\n';
      }
      out.close();
      return;
    }
    if (!o.has("src") || !o.has("tgt"))
      throw UsageError("align needs --src and --tgt (or --import)");
    const auto corpus = read_corpus(o["src"], o["tgt"], tokenize_mode(cfg));
    if (corpus.empty())
      throw DataError("align: empty corpus");
    const auto dir = parse_direction(cfg.symmetrize);
    std::optional<TTable> fwd, bwd;
    if (dir != AlignDirection::Backward) fwd = train_model1(corpus, cfg.iterations);
    if (dir != AlignDirection::Forward) {
      std::vector<SentencePair> rev;
      rev.reserve(corpus.size());
      for (const auto& p : corpus) rev.push_back(reversed(p));
      bwd = train_model1(rev, cfg.iterations);
    }
    for (const auto& p : corpus) {
      AlignmentLinks links;
      if (dir == AlignDirection::Forward) {
        links = viterbi_align(*fwd, p);
      } else if (dir == AlignDirection::Backward) {
        links = viterbi_align(*bwd, reversed(p)).transposed();
      } else {
        links = symmetrize(viterbi_align(*fwd, p), viterbi_align(*bwd, reversed(p)),
                           dir == AlignDirection::Union ? Symmetrization::Union : Symmetrization::Intersection);
      }
      out.stream() << format_pharaoh(links) << '\n';
    }
    out.close();
    if (o.has("ttable")) {
      io::Output t(o["ttable"]);
      write_ttable(t.stream(), fwd ? *fwd : *bwd);
      t.close();
    }
  };
}

void setup_build_dict(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("build-dict", "bilingual dictionary from alignment links");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--src", "source side", true);
  f.path(app, "--tgt", "target side", true);
  f.path(app, "--align", "Pharaoh alignment file", true);
  f.path(app, "--output", "dictionary TSV (default stdout)");
  f.add(app, "--min-count", "min_count", "keep pairs whose link count exceeds this");
  f.add(app, "--tokenize", "tokenize", "whitespace|aggressive");
  c.run = [](const Overrides& o) {
    const PipelineConfig cfg = o.resolve("build-dict");
    const auto corpus = read_corpus(o["src"], o["tgt"], tokenize_mode(cfg));
    const auto links = read_alignments(o["align"]);
    const auto counts = accumulate_counts(corpus, links);
    const auto dict = build_dictionary(counts, cfg.min_count);
    io::Output out(o.has("output") ? o["output"] : "-");
    write_dictionary(out.stream(), dict);
    out.close();
    std::cerr << "build-dict: " << dict.size() << " entries from " << counts.total_links() << " links\n";
  };
}

void setup_annotate(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("annotate", "annotate a parallel corpus (or a source file) with unknown tokens");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--src", "source side", true);
  f.path(app, "--tgt", "target side (omit with --source-only)");
  f.path(app, "--align", "Pharaoh alignment file");
  f.path(app, "--src-vocab", "source vocabulary", true);
  f.path(app, "--tgt-vocab", "target vocabulary");
  f.path(app, "--out-src", "annotated source (default stdout)");
  f.path(app, "--out-tgt", "annotated target");
  f.path(app, "--provenance", "line<TAB>position<TAB>original_word sidecar");
  static bool source_only = false;
  static std::string specials = std::string(kUnk);
  app->add_flag("--source-only", source_only, "annotate test-time source only");
  app->add_option("--specials", specials, "comma-separated vocabulary specials");
  f.add(app, "--scheme", "scheme", "copyable|posall|posunk");
  f.add(app, "--window", "window", "maximum |d|");
  f.add(app, "--max-copy", "max_copy", "number of copy tokens (copyable)");
  f.add(app, "--tokenize", "tokenize", "whitespace|aggressive");
  c.run = [](const Overrides& o) {
    const PipelineConfig cfg = o.resolve("annotate");
    if (cfg.scheme == "noalign")
      throw UsageError("noalign is a post-processing baseline; annotate with posunk or any scheme");
    const auto sp = split_specials(specials);
    const Vocabulary src_vocab = load_vocab(o["src-vocab"], sp);
    Vocabulary tgt_vocab;
    if (!source_only) {
      if (!o.has("tgt") || !o.has("align") || !o.has("tgt-vocab") || !o.has("out-tgt"))
        throw UsageError("pair annotation needs --tgt, --align, --tgt-vocab and --out-tgt");
      tgt_vocab = load_vocab(o["tgt-vocab"], sp);
    }
    const LineAnnotator annotator(src_vocab, tgt_vocab, cfg.scheme_params(), tokenize_mode(cfg));
    io::Input src(o["src"]);
    io::Output out_src(o.has("out-src") ? o["out-src"] : "-");
    std::optional<io::Input> tgt, aln;
    std::optional<io::Output> out_tgt, prov;
    if (!source_only) {
      tgt.emplace(o["tgt"]);
      aln.emplace(o["align"]);
      out_tgt.emplace(o["out-tgt"]);
    }
    if (o.has("provenance")) prov.emplace(o["provenance"]);
    const auto lines = annotate_stream(annotator, {src.stream(), tgt ? &tgt->stream() : nullptr,
                                                   aln ? &aln->stream() : nullptr, out_src.stream(),
                                                   out_tgt ? &out_tgt->stream() : nullptr,
                                                   prov ? &prov->stream() : nullptr});
    out_src.close();
    if (out_tgt) out_tgt->close();
    if (prov) prov->close();
    std::cerr << "annotate: " << lines << " lines (" << to_string(annotator.scheme().kind) << ")\n";
  };
}

void setup_postprocess(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("postprocess", "replace unknown tokens in translator output");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--input", "translator output", true);
  f.path(app, "--source", "original source (posunk, posall, noalign)");
  f.path(app, "--annotated-source", "annotated source (copyable)");
  f.path(app, "--provenance", "provenance sidecar from annotate (copyable)");
  f.path(app, "--src-vocab", "source vocabulary (noalign)");
  f.path(app, "--dict", "dictionary TSV; identity translation when omitted");
  f.path(app, "--output", "post-processed text (default stdout)");
  f.path(app, "--stats", "statistics report (default stderr)");
  static std::string specials = std::string(kUnk);
  app->add_option("--specials", specials, "comma-separated vocabulary specials");
  f.add(app, "--scheme", "scheme", "copyable|posall|posunk|noalign");
  f.add(app, "--window", "window", "maximum |d|");
  f.add(app, "--fallback", "fallback", "drop|literal");
  f.add(app, "--tokenize", "tokenize", "source tokenization: whitespace|aggressive");
  c.run = [](const Overrides& o) {
    const PipelineConfig cfg = o.resolve("postprocess");
    const auto mode = parse_postprocess_mode(cfg.scheme);
    const TranslationDictionary dict = o.has("dict") ? load_dict(o["dict"]) : TranslationDictionary{};
    std::optional<Vocabulary> src_vocab;
    if (mode == PostprocessMode::NoAlign) {
      if (!o.has("src-vocab"))
        throw UsageError("noalign needs --src-vocab");
      src_vocab = load_vocab(o["src-vocab"], split_specials(specials));
    }
    Postprocessor post(dict, {parse_fallback(cfg.fallback), cfg.window});
    const LinePostprocessor proc(post, mode, src_vocab ? &*src_vocab : nullptr, tokenize_mode(cfg));
    io::Input in(o["input"]);
    std::optional<io::Input> src, asrc, prov;
    if (mode == PostprocessMode::Copyable) {
      if (!o.has("annotated-source") || !o.has("provenance"))
        throw UsageError("copyable needs --annotated-source and --provenance");
      asrc.emplace(o["annotated-source"]);
      prov.emplace(o["provenance"]);
    } else {
      if (!o.has("source"))
        throw UsageError(cfg.scheme + " needs --source");
      src.emplace(o["source"]);
    }
    io::Output out(o.has("output") ? o["output"] : "-");
    postprocess_stream(proc, {in.stream(), src ? &src->stream() : nullptr, asrc ? &asrc->stream() : nullptr,
                              prov ? &prov->stream() : nullptr, out.stream()});
    out.close();
    if (o.has("stats")) {
      io::Output st(o["stats"]);
      write_stats(st.stream(), post.stats());
      st.close();
    } else {
      write_stats(std::cerr, post.stats());
    }
  };
}

std::vector<std::vector<Sentence>> read_references(const std::vector<std::string>& paths, std::size_t expected)
{
  std::vector<std::vector<Sentence>> refs(expected);
  for (const auto& p : paths) {
    auto side = read_sentences(p, TokenizeMode::Whitespace, true);
    if (side.size() != expected)
      throw DataError(p + " has " + std::to_string(side.size()) + " lines, expected " + std::to_string(expected));
    for (std::size_t k = 0; k < expected; ++k) refs[k].push_back(std::move(side[k]));
  }
  return refs;
}

void setup_bleu(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("bleu", "tokenized corpus BLEU");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--hyp", "hypotheses", true);
  f.path(app, "--output", "report (default stdout)");
  static std::vector<std::string> refs;
  app->add_option("--ref", refs, "reference file; repeat for multiple references")->required();
  f.add(app, "--max-order", "max_order", "maximum n-gram order");
  auto* lc = app->add_flag("--lowercase", "ASCII case-insensitive scoring");
  c.run = [lc](const Overrides& o) {
    PipelineConfig cfg = o.resolve("bleu");
    if (lc->count() > 0) cfg.set("lowercase", "true");
    const auto hyps = read_sentences(o["hyp"], TokenizeMode::Whitespace, true);
    const auto r = read_references(refs, hyps.size());
    const auto report = corpus_bleu(hyps, r, cfg.max_order, cfg.lowercase);
    io::Output out(o.has("output") ? o["output"] : "-");
    write_bleu_report(out.stream(), report);
    out.close();
  };
}

void setup_rare_analysis(CLI::App& root, Command& c)
{
  c.app = root.add_subcommand("rare-analysis", "BLEU per group of test sentences sorted by word rarity");
  auto* app = c.app;
  auto& f = c.flags;
  f.add_common(app);
  f.path(app, "--source", "test sentences scored for rarity (usually the test source)", true);
  f.path(app, "--counts", "training word<TAB>count file from build-vocab", true);
  f.path(app, "--hyp", "hypotheses", true);
  f.path(app, "--output", "TSV report (default stdout)");
  static std::vector<std::string> refs;
  app->add_option("--ref", refs, "reference file; repeat for multiple references")->required();
  f.add(app, "--group-size", "group_size", "sentences per group");
  f.add(app, "--metric", "metric", "inverse_frequency|frequency_rank");
  f.add(app, "--max-order", "max_order", "maximum n-gram order");
  c.run = [](const Overrides& o) {
    const PipelineConfig cfg = o.resolve("rare-analysis");
    FrequencyTable counts;
    {
      io::Input in(o["counts"]);
      try {
        counts = read_counts(in.stream());
      } catch (const DataError& e) {
        throw DataError(o["counts"] + ": " + e.what());
      }
    }
    const auto src = read_sentences(o["source"], tokenize_mode(cfg), false);
    const auto hyps = read_sentences(o["hyp"], TokenizeMode::Whitespace, true);
    if (hyps.size() != src.size())
      throw DataError("hypotheses and test source differ in length");
    const auto r = read_references(refs, hyps.size());
    auto report = bucketize(src, counts, cfg.group_size, parse_metric(cfg.metric));
    report = bucket_bleu(std::move(report), hyps, r, cfg.max_order, cfg.lowercase);
    io::Output out(o.has("output") ? o["output"] : "-");
    write_bucket_report(out.stream(), report);
    out.close();
  };
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"rareword: rare-word annotation and post-processing for black-box translators"};
  app.require_subcommand(1);
  std::vector<Command> commands(8);
  setup_build_vocab(app, commands[0]);
  setup_filter(app, commands[1]);
  setup_align(app, commands[2]);
  setup_build_dict(app, commands[3]);
  setup_annotate(app, commands[4]);
  setup_postprocess(app, commands[5]);
  setup_bleu(app, commands[6]);
  setup_rare_analysis(app, commands[7]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      c.run(c.flags);
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "rareword " << c.app->get_name() << ": " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "rareword " << c.app->get_name() << ": " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}
