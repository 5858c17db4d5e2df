#include "sqlforge/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "sqlforge/error.hpp"
#include "sqlforge/features.hpp"
#include "sqlforge/lexer.hpp"
#include "sqlforge/prompts.hpp"
#include "sqlforge/render.hpp"
#include "sqlforge/resolve.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

using ast::AstNode;
using ast::ClauseKind;
using ast::NodeKind;
using ast::NodePath;

std::string_view operator_code(OperatorId op) {
  switch (op) {
    case OperatorId::func: return "FUNC";
    case OperatorId::op: return "OP";
    case OperatorId::logic: return "LOGIC";
    case OperatorId::join: return "JOIN";
    case OperatorId::nest: return "NEST";
    case OperatorId::set: return "SET";
  }
  return "?";
}

std::string_view operator_display_name(OperatorId op) {
  switch (op) {
    case OperatorId::func: return "Functional Wrapping";
    case OperatorId::op: return "Operator Mutation";
    case OperatorId::logic: return "Logical Clause Expansion";
    case OperatorId::join: return "Relational Expansion";
    case OperatorId::nest: return "Nesting Evolution";
    case OperatorId::set: return "Set Composition";
  }
  return "?";
}

std::string_view operator_slug(OperatorId op) {
  switch (op) {
    case OperatorId::func: return "func";
    case OperatorId::op: return "op";
    case OperatorId::logic: return "logic";
    case OperatorId::join: return "join";
    case OperatorId::nest: return "nest";
    case OperatorId::set: return "set";
  }
  return "?";
}

std::optional<OperatorId> parse_operator(std::string_view text) {
  std::string t = trim(text);
  for (OperatorId op : kOperators) {
    if (iequals(t, operator_code(op)) || iequals(t, operator_slug(op)) || iequals(t, operator_display_name(op)))
      return op;
  }
  return std::nullopt;
}

std::string_view operator_instruction(OperatorId op) {
  static const std::string texts[6] = {
      trim(prompt_asset("op_func")), trim(prompt_asset("op_op")),   trim(prompt_asset("op_logic")),
      trim(prompt_asset("op_join")), trim(prompt_asset("op_nest")), trim(prompt_asset("op_set")),
  };
  return texts[static_cast<std::size_t>(op)];
}

namespace {

bool is_comparison(const AstNode& n) {
  if (n.kind != NodeKind::op || n.children.size() != 2) return false;
  const std::string& s = n.name;
  return s == "=" || s == "<>" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=";
}

bool is_value_literal(const AstNode& n) {
  return n.kind == NodeKind::literal && (n.literal == ast::LiteralKind::integer ||
                                         n.literal == ast::LiteralKind::real ||
                                         n.literal == ast::LiteralKind::string);
}

bool is_omega(const AstNode& n) {
  if (n.kind != NodeKind::op) return false;
  return n.name == "CASE" || n.name == "BETWEEN" || n.name == "IN" || n.name == "NOT IN" || n.name == "LIKE";
}

NodePath parent_of(NodePath p) {
  if (!p.empty()) p.pop_back();
  return p;
}

NodePath child_of(NodePath p, std::size_t i) {
  p.push_back(i);
  return p;
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  std::size_t pick(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine() % n); }
  bool chance(double p) { return static_cast<double>(engine() >> 11) * 0x1.0p-53 < p; }
};

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_floor2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", std::floor(v * 100.0) / 100.0);
  return buf;
}

double literal_number(const AstNode& lit) { return std::strtod(lit.name.c_str(), nullptr); }

std::optional<AstNode> literal_from(const CellValue& v, bool floor2 = false) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return ast::make_integer(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    if (!std::isfinite(*d)) return std::nullopt;
    return ast::make_real(floor2 ? format_floor2(*d) : format_real(*d));
  }
  if (const auto* s = std::get_if<std::string>(&v)) return ast::make_string(*s);
  return std::nullopt;
}

AstNode number_literal(double v, bool integral) {
  if (integral) return ast::make_integer(static_cast<long long>(std::llround(v)));
  return ast::make_real(format_real(v));
}

std::string ident(std::string_view raw) { return render_identifier(schema_identifier(raw)); }

// One node inside an expression, with the select-core and clause it belongs to.
struct ExprSite {
  NodePath path;
  NodePath core;
  ClauseKind clause = ClauseKind::select;
  bool in_aggregate = false;
};

void collect_exprs(const AstNode& n, NodePath& path, const NodePath& core, std::optional<ClauseKind> clause, bool in_agg,
                   std::vector<ExprSite>& out) {
  NodePath here_core = core;
  std::optional<ClauseKind> here_clause = clause;
  bool agg = in_agg;
  if (n.kind == NodeKind::select_core) {
    here_core = path;
    here_clause.reset();
  } else if (n.kind == NodeKind::clause && !clause && n.clause != ClauseKind::partition_by) {
    here_clause = n.clause;
  } else if (n.kind == NodeKind::function && !n.is_window_call() && ast::is_aggregate_name(n.name)) {
    agg = true;
  }
  if (here_clause && (n.kind == NodeKind::op || n.kind == NodeKind::literal || n.kind == NodeKind::column_ref)) {
    out.push_back({path, here_core, *here_clause, in_agg});
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    path.push_back(i);
    collect_exprs(n.children[i], path, here_core, here_clause, agg, out);
    path.pop_back();
  }
}

void collect_top_cores(const AstNode& n, const NodePath& path, std::vector<NodePath>& out) {
  if (n.kind == NodeKind::select_core) {
    out.push_back(path);
  } else if (n.kind == NodeKind::set_op) {
    for (std::size_t i = 0; i < n.children.size(); ++i) collect_top_cores(n.children[i], child_of(path, i), out);
  }
}

struct ColumnChoice {
  AstNode ref;  // qualified column reference
  ColumnDef column;
  std::string table;  // base table
};

struct JoinCandidate {
  NodePath from_path;
  int scope = -1;
  std::string existing;  // visible name of the source the edge starts from
  JoinEdge edge;
};

struct Ctx {
  const ast::SqlAst& tree;
  const DatabaseSchema& schema;
  const PlannerOptions& opt;
  ScopeAnalysis an;
  JoinGraph graph;
  std::vector<NodePath> top_cores;
  std::vector<ExprSite> exprs;
  int max_depth = 1;

  Ctx(const ast::SqlAst& t, const DatabaseSchema& s, const PlannerOptions& o)
      : tree(t), schema(s), opt(o), an(analyze_scopes(t, s)), graph(fk_join_graph(s)) {
    collect_top_cores(t.root, {}, top_cores);
    NodePath p;
    collect_exprs(t.root, p, {}, std::nullopt, false, exprs);
    for (const auto& sc : an.scopes) max_depth = std::max(max_depth, sc.depth);
  }

  const AstNode& at(const NodePath& p) const { return ast::node_at(tree.root, p); }
  bool is_top_core(const NodePath& p) const { return std::find(top_cores.begin(), top_cores.end(), p) != top_cores.end(); }

  bool date_like(const ColumnDef& c) const { return is_date_like(c, opt.date_patterns); }

  // Base-table columns in scope for new predicates and sort keys.
  std::vector<ColumnChoice> scope_columns(int scope) const {
    std::vector<ColumnChoice> out;
    for (const auto& src : an.scopes[scope].sources) {
      if (src.table.empty() || src.visible_name.empty()) continue;
      const TableDef* def = schema.find_table(src.table);
      if (!def) continue;
      std::vector<ColumnChoice> plain;
      std::vector<ColumnChoice> keys;
      for (const auto& col : def->columns) {
        if (col.affinity == Affinity::blob) continue;
        ColumnChoice c{ast::make_column(src.visible_name, schema_identifier(col.name)), col, def->name};
        bool is_key = std::any_of(def->primary_key.begin(), def->primary_key.end(),
                                  [&](const std::string& k) { return iequals(k, col.name); });
        (is_key ? keys : plain).push_back(std::move(c));
      }
      if (plain.empty()) plain = std::move(keys);
      out.insert(out.end(), plain.begin(), plain.end());
    }
    return out;
  }

  // The root WITH is visible from every core, including the root itself.
  std::string root_with_prefix() const {
    if (tree.root.kind != NodeKind::select_core) return {};
    const AstNode* with = ast::find_clause(tree.root, ClauseKind::with);
    return with ? render_node(*with) + " " : std::string();
  }
};

const ColumnResolution* resolution(const Ctx& ctx, const NodePath& p) { return ctx.an.resolution_at(p); }

std::vector<CellValue> sample(ValueSampler* sampler, const std::string& sql, std::size_t limit) {
  if (!sampler) return {};
  return sampler->probe(sql, limit);
}

std::string table_values_sql(const std::string& table, const std::string& column, std::size_t pool) {
  std::string c = ident(column);
  return "SELECT " + c + " FROM " + ident(table) + " WHERE " + c + " IS NOT NULL GROUP BY " + c +
         " ORDER BY COUNT(*) DESC, " + c + " LIMIT " + std::to_string(pool);
}

// ---- FUNC --------------------------------------------------------------------

std::vector<std::string> func_choices(const Ctx& ctx, const ColumnResolution& r) {
  NodePath parent = parent_of(r.path);
  const AstNode& p = ctx.at(parent);
  NodePath core;
  if (p.is_clause(ClauseKind::select)) {
    core = parent_of(parent);
    if (!ctx.is_top_core(core)) return {};  // renaming an output column would break outer references
  }
  bool date = ctx.date_like(r.column);
  bool numeric = is_numeric(r.column.affinity) && !date;
  bool text = r.column.affinity == Affinity::text && !date;
  switch (r.clause) {
    case ClauseKind::where:
    case ClauseKind::having:
      if (numeric) return {"ROUND"};
      return {};
    case ClauseKind::group_by:
      if (date) return {"STRFTIME"};
      if (numeric) return {"ROUND"};
      if (text) return {"UPPER", "LENGTH"};
      return {};
    case ClauseKind::select:
    case ClauseKind::order_by: {
      const AstNode& core_node = ctx.at(ctx.an.scopes[r.scope].path);
      bool grouped = ast::find_clause(core_node, ClauseKind::group_by) != nullptr;
      bool agg_ok = grouped && r.bound_scope == r.scope;
      if (date) return {"STRFTIME"};
      if (numeric) return agg_ok ? std::vector<std::string>{"AVG", "SUM", "ROUND"} : std::vector<std::string>{"ROUND"};
      if (text) return {"LENGTH", "UPPER"};
      return {};
    }
    default:
      return {};
  }
}

std::vector<NodePath> func_sites(const Ctx& ctx) {
  std::vector<NodePath> out;
  for (const auto& r : ctx.an.resolved) {
    if (r.alias_ref || r.source < 0 || r.in_aggregate || r.in_window) continue;
    if (!func_choices(ctx, r).empty()) out.push_back(r.path);
  }
  return out;
}

MutationPlan plan_func(const Ctx& ctx, const NodePath& site, Rng& rng) {
  const ColumnResolution* r = resolution(ctx, site);
  auto choices = func_choices(ctx, *r);
  std::string f = choices[rng.pick(choices.size())];
  const AstNode& col = ctx.at(site);
  MutationPlan plan;
  plan.op = OperatorId::func;
  plan.target_path = site;
  plan.original = col;
  plan.symbol = f;
  if (f == "STRFTIME") {
    plan.payload = ast::make_function(f, {ast::make_string("%Y"), col});
    plan.hole = {1};
  } else {
    plan.payload = ast::make_function(f, {col});
    plan.hole = {0};
  }
  plan.description = "using " + render_node(plan.payload);
  return plan;
}

// ---- OP ----------------------------------------------------------------------

struct OpSite {
  NodePath path;
  bool predicate = false;  // comparison in WHERE/HAVING; otherwise projection or sort expression
};

std::vector<OpSite> op_sites(const Ctx& ctx) {
  std::vector<OpSite> out;
  for (const auto& e : ctx.exprs) {
    if (e.clause != ClauseKind::where && e.clause != ClauseKind::having) continue;
    const AstNode& n = ctx.at(e.path);
    if (!is_comparison(n) || !is_value_literal(n.children[1]) || n.children[0].kind == NodeKind::literal) continue;
    out.push_back({e.path, true});
  }
  for (const auto& r : ctx.an.resolved) {
    if (r.alias_ref || r.source < 0 || r.in_aggregate || r.in_window) continue;
    NodePath parent = parent_of(r.path);
    const AstNode& p = ctx.at(parent);
    if (r.clause == ClauseKind::select) {
      NodePath clause = p.kind == NodeKind::alias ? parent_of(parent) : parent;
      if (!ctx.at(clause).is_clause(ClauseKind::select)) continue;
      if (!ctx.is_top_core(parent_of(clause))) continue;
      out.push_back({r.path, false});
    } else if (r.clause == ClauseKind::order_by && p.kind == NodeKind::sort_key) {
      out.push_back({r.path, false});
    }
  }
  std::sort(out.begin(), out.end(), [](const OpSite& a, const OpSite& b) { return a.path < b.path; });
  return out;
}

std::optional<std::pair<double, double>> column_range(const Ctx& ctx, const ColumnResolution* r, ValueSampler* s) {
  if (!r || r->table.empty() || !is_numeric(r->column.affinity)) return std::nullopt;
  std::string c = ident(r->column.name);
  std::string t = ident(r->table);
  auto lo = sample(s, "SELECT MIN(" + c + ") FROM " + t, 1);
  auto hi = sample(s, "SELECT MAX(" + c + ") FROM " + t, 1);
  auto num = [](const CellValue& v) -> std::optional<double> {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
  };
  if (lo.empty() || hi.empty()) return std::nullopt;
  auto a = num(lo[0]);
  auto b = num(hi[0]);
  if (!a || !b) return std::nullopt;
  (void)ctx;
  return std::pair{*a, *b};
}

// A sampled value of the column different from `current`, when one exists.
std::optional<AstNode> other_value(const Ctx& ctx, const ColumnResolution* r, const AstNode& current, ValueSampler* s,
                                   Rng& rng) {
  if (!r || r->table.empty()) return std::nullopt;
  auto values = sample(s, table_values_sql(r->table, r->column.name, ctx.opt.value_pool), ctx.opt.value_pool);
  std::vector<AstNode> options;
  for (const auto& v : values) {
    auto lit = literal_from(v);
    if (lit && render_node(*lit) != render_node(current)) options.push_back(std::move(*lit));
  }
  if (options.empty()) return std::nullopt;
  return options[rng.pick(options.size())];
}

MutationPlan plan_op(const Ctx& ctx, const OpSite& site, ValueSampler* sampler, Rng& rng) {
  const AstNode& node = ctx.at(site.path);
  MutationPlan plan;
  plan.op = OperatorId::op;
  plan.target_path = site.path;
  plan.original = node;

  if (!site.predicate) {
    const ColumnResolution* r = resolution(ctx, site.path);
    bool text = r && r->column.affinity == Affinity::text;
    bool in_select = r && r->clause == ClauseKind::select;
    bool like = text && in_select && rng.chance(0.5);
    if (like) {
      std::string pattern = "%a%";
      if (r && !r->table.empty()) {
        auto values = sample(sampler, table_values_sql(r->table, r->column.name, ctx.opt.value_pool), ctx.opt.value_pool);
        std::vector<std::string> texts;
        for (const auto& v : values) {
          if (const auto* sv = std::get_if<std::string>(&v); sv && !sv->empty()) texts.push_back(*sv);
        }
        if (!texts.empty()) pattern = texts[rng.pick(texts.size())].substr(0, 1) + "%";
      }
      plan.payload = ast::make_op("LIKE", {node, ast::make_string(pattern)});
      plan.hole = {0};
      plan.symbol = "LIKE";
    } else {
      AstNode fallback = text || (r && ctx.date_like(r->column)) ? ast::make_string("unknown") : ast::make_integer(0);
      AstNode c = ast::make_op("CASE", {ast::make_op("IS", {node, ast::make_null()}), fallback, node});
      c.case_else = true;
      plan.payload = std::move(c);
      plan.hole = {2};
      plan.symbol = "CASE WHEN";
    }
    plan.description = "using " + render_node(plan.payload);
    return plan;
  }

  const AstNode& lhs = node.children[0];
  const AstNode& lit = node.children[1];
  const ColumnResolution* r = lhs.kind == NodeKind::column_ref ? resolution(ctx, child_of(site.path, 0)) : nullptr;
  bool text = lit.literal == ast::LiteralKind::string;
  bool integral = lit.literal == ast::LiteralKind::integer;
  const std::string& s = node.name;
  plan.embedded = {0};
  plan.hole = {0};

  auto in_list = [&](const std::string& sym) {
    std::vector<AstNode> kids{lhs, lit};
    if (auto other = other_value(ctx, r, lit, sampler, rng)) {
      kids.push_back(std::move(*other));
    } else if (!text) {
      kids.push_back(number_literal(literal_number(lit) + 1, integral));
    }
    plan.payload = ast::make_op(sym, std::move(kids));
    plan.symbol = sym;
  };
  auto between = [&](AstNode lo, AstNode hi) {
    plan.payload = ast::make_op("BETWEEN", {lhs, std::move(lo), std::move(hi)});
    plan.symbol = "BETWEEN";
  };

  if (s == "<>" || s == "!=") {
    in_list("NOT IN");
  } else if (s == "=") {
    if (text || rng.chance(0.5)) {
      in_list("IN");
    } else {
      auto range = column_range(ctx, r, sampler);
      double v = literal_number(lit);
      double hi = range && range->second > v ? range->second : v + 1;
      between(lit, number_literal(hi, integral && std::floor(hi) == hi));
    }
  } else if (s == ">" || s == ">=") {
    if (text) {
      between(lit, ast::make_string("~"));
    } else {
      auto range = column_range(ctx, r, sampler);
      double v = literal_number(lit);
      double hi = range && range->second > v ? range->second : std::abs(v) * 10 + 1000;
      between(lit, number_literal(hi, integral && std::floor(hi) == hi));
    }
  } else {  // < and <=
    if (text) {
      between(ast::make_string(""), lit);
    } else {
      auto range = column_range(ctx, r, sampler);
      double v = literal_number(lit);
      double lo = range && range->first < v ? range->first : (v >= 0 ? 0 : v - std::abs(v) * 10 - 1000);
      between(number_literal(lo, integral && std::floor(lo) == lo), lit);
    }
  }
  plan.description = "using " + render_node(plan.payload);
  return plan;
}

// ---- LOGIC -------------------------------------------------------------------

struct LogicSite {
  NodePath path;
  int scope = -1;
  ClauseKind clause = ClauseKind::where;
  bool create = false;
};

std::vector<ColumnChoice> new_sort_columns(const Ctx& ctx, int scope, const AstNode* order_by) {
  std::set<std::string> existing;
  if (order_by) {
    for (const auto& k : order_by->children) existing.insert(render_node(k.children.at(0)));
  }
  std::vector<ColumnChoice> out;
  for (auto& c : ctx.scope_columns(scope)) {
    if (!existing.count(render_node(c.ref))) out.push_back(std::move(c));
  }
  return out;
}

std::vector<LogicSite> logic_sites(const Ctx& ctx) {
  std::vector<LogicSite> out;
  for (std::size_t si = 0; si < ctx.an.scopes.size(); ++si) {
    const CoreScope& sc = ctx.an.scopes[si];
    const AstNode& core = ctx.at(sc.path);
    int scope = static_cast<int>(si);
    bool has_columns = !ctx.scope_columns(scope).empty();
    auto clause_path = [&](ClauseKind k) -> std::optional<NodePath> {
      for (std::size_t i = 0; i < core.children.size(); ++i) {
        if (core.children[i].is_clause(k)) return child_of(sc.path, i);
      }
      return std::nullopt;
    };
    if (auto p = clause_path(ClauseKind::where)) {
      if (has_columns) out.push_back({*p, scope, ClauseKind::where, false});
    } else if (has_columns && ast::find_clause(core, ClauseKind::from)) {
      out.push_back({sc.path, scope, ClauseKind::where, true});
    }
    if (auto p = clause_path(ClauseKind::having)) {
      out.push_back({*p, scope, ClauseKind::having, false});
    } else if (ast::find_clause(core, ClauseKind::group_by)) {
      out.push_back({sc.path, scope, ClauseKind::having, true});
    }
    const AstNode* order = ast::find_clause(core, ClauseKind::order_by);
    if (!new_sort_columns(ctx, scope, order).empty()) {
      if (auto p = clause_path(ClauseKind::order_by)) {
        out.push_back({*p, scope, ClauseKind::order_by, false});
      } else if (sc.path.empty()) {
        out.push_back({sc.path, scope, ClauseKind::order_by, true});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const LogicSite& a, const LogicSite& b) {
    return std::tie(a.path, a.clause) < std::tie(b.path, b.clause);
  });
  return out;
}

AstNode is_not_null(const AstNode& e) { return ast::make_op("IS NOT", {e, ast::make_null()}); }

// Predicate `col = v` (or `col >= v` for reals) with v drawn from rows the core
// already selects, so AND keeps the result non-empty.
AstNode where_predicate(const Ctx& ctx, const LogicSite& site, bool probe_core, ValueSampler* sampler, Rng& rng) {
  auto cols = ctx.scope_columns(site.scope);
  const ColumnChoice& c = cols[rng.pick(cols.size())];
  bool real = c.column.affinity == Affinity::real;
  std::vector<CellValue> values;
  if (sampler && probe_core) {
    const AstNode& core = ctx.at(ctx.an.scopes[site.scope].path);
    AstNode probe;
    probe.kind = NodeKind::select_core;
    probe.children.push_back(ast::make_clause(ClauseKind::select, {c.ref}));
    probe.children.push_back(*ast::find_clause(core, ClauseKind::from));
    AstNode cond = is_not_null(c.ref);
    if (const AstNode* w = ast::find_clause(core, ClauseKind::where)) {
      cond = ast::make_logical(ast::Connective::and_, {w->children.at(0), cond});
    }
    probe.children.push_back(ast::make_clause(ClauseKind::where, {cond}));
    probe.children.push_back(ast::make_clause(ClauseKind::group_by, {c.ref}));
    probe.children.push_back(ast::make_clause(
        ClauseKind::order_by,
        {ast::make_sort_key(ast::make_function("COUNT", {ast::make_star()}), ast::SortOrder::desc),
         ast::make_sort_key(c.ref, ast::SortOrder::none)}));
    probe.children.push_back(ast::make_clause(ClauseKind::limit, {ast::make_integer(static_cast<long long>(ctx.opt.value_pool))}));
    values = sampler->probe(ctx.root_with_prefix() + render_node(probe), ctx.opt.value_pool);
  }
  if (values.empty()) values = sample(sampler, table_values_sql(c.table, c.column.name, ctx.opt.value_pool), ctx.opt.value_pool);
  std::vector<AstNode> lits;
  for (const auto& v : values) {
    if (auto l = literal_from(v, real)) lits.push_back(std::move(*l));
  }
  if (lits.empty()) return is_not_null(c.ref);
  AstNode lit = lits[rng.pick(lits.size())];
  return ast::make_op(real ? ">=" : "=", {c.ref, std::move(lit)});
}

AstNode having_predicate(const Ctx& ctx, const LogicSite& site, bool probe_core, ValueSampler* sampler, Rng& rng) {
  auto cols = ctx.scope_columns(site.scope);
  AstNode agg = ast::make_function("COUNT", {ast::make_star()});
  if (!cols.empty()) {
    const ColumnChoice& c = cols[rng.pick(cols.size())];
    bool numeric = is_numeric(c.column.affinity) && !ctx.date_like(c.column);
    static const char* numeric_aggs[] = {"COUNT", "AVG", "SUM", "MAX", "MIN"};
    std::string f = numeric ? numeric_aggs[rng.pick(5)] : "COUNT";
    agg = ast::make_function(f, {c.ref});
  }
  std::vector<CellValue> values;
  if (sampler && probe_core) {
    const AstNode& core = ctx.at(ctx.an.scopes[site.scope].path);
    AstNode probe;
    probe.kind = NodeKind::select_core;
    probe.children.push_back(ast::make_clause(ClauseKind::select, {agg}));
    for (ClauseKind k : {ClauseKind::from, ClauseKind::where, ClauseKind::group_by, ClauseKind::having}) {
      if (const AstNode* cl = ast::find_clause(core, k)) probe.children.push_back(*cl);
    }
    probe.children.push_back(ast::make_clause(
        ClauseKind::order_by, {ast::make_sort_key(ast::make_integer(1), ast::SortOrder::desc)}));
    probe.children.push_back(ast::make_clause(ClauseKind::limit, {ast::make_integer(static_cast<long long>(ctx.opt.value_pool))}));
    values = sampler->probe(ctx.root_with_prefix() + render_node(probe), ctx.opt.value_pool);
  }
  std::vector<AstNode> lits;
  for (const auto& v : values) {
    if (auto l = literal_from(v, true)) lits.push_back(std::move(*l));
  }
  if (lits.empty()) return ast::make_op(">=", {std::move(agg), ast::make_integer(1)});
  AstNode lit = lits[rng.pick(lits.size())];
  return ast::make_op(">=", {std::move(agg), std::move(lit)});
}

AstNode sort_key_for(const Ctx& ctx, const LogicSite& site, Rng& rng) {
  const AstNode& core = ctx.at(ctx.an.scopes[site.scope].path);
  auto cols = new_sort_columns(ctx, site.scope, ast::find_clause(core, ClauseKind::order_by));
  const ColumnChoice& c = cols[rng.pick(cols.size())];
  if (ast::find_clause(core, ClauseKind::group_by)) {
    bool numeric = is_numeric(c.column.affinity) && !ctx.date_like(c.column);
    return ast::make_sort_key(ast::make_function(numeric ? "AVG" : "MIN", {c.ref}), ast::SortOrder::asc);
  }
  return ast::make_sort_key(c.ref, rng.chance(0.5) ? ast::SortOrder::asc : ast::SortOrder::desc);
}

MutationPlan plan_logic(const Ctx& ctx, const LogicSite& site, ValueSampler* sampler, Rng& rng) {
  ast::Connective conn = rng.chance(ctx.opt.and_probability) ? ast::Connective::and_ : ast::Connective::or_;
  bool and_ = conn == ast::Connective::and_ || site.create;
  AstNode e_new;
  switch (site.clause) {
    case ClauseKind::where: e_new = where_predicate(ctx, site, and_, sampler, rng); break;
    case ClauseKind::having: e_new = having_predicate(ctx, site, and_, sampler, rng); break;
    default: e_new = sort_key_for(ctx, site, rng); break;
  }
  std::optional<ClauseKind> create;
  if (site.create) create = site.clause;
  return make_logic_plan(ctx.tree, site.path, create, conn, std::move(e_new));
}

// ---- JOIN --------------------------------------------------------------------

bool mentions_name(const std::vector<std::string>& names, std::string_view n) {
  return std::any_of(names.begin(), names.end(), [&](const std::string& x) { return iequals(x, n); });
}

// Unqualified names whose binding passes through `scope`; a new source carrying
// any of these columns would capture or make them ambiguous.
std::vector<std::string> blocked_names(const Ctx& ctx, int scope) {
  std::vector<std::string> out;
  auto passes = [&](int from, int to) {
    for (int s = from; s != -1; s = ctx.an.scopes[s].parent) {
      if (s == scope) return true;
      if (s == to) break;
    }
    return false;
  };
  for (const auto& r : ctx.an.resolved) {
    const AstNode& n = ctx.at(r.path);
    if (n.qualifier.empty() && passes(r.scope, r.bound_scope)) out.push_back(n.name);
  }
  for (const auto& r : ctx.an.unresolved) {
    const AstNode& n = ctx.at(r.path);
    if (n.qualifier.empty() && passes(r.scope, -1)) out.push_back(n.name);
  }
  return out;
}

std::set<std::string> cte_names(const AstNode& n) {
  std::set<std::string> out;
  ast::walk(n, [&](const AstNode& x, const NodePath&) {
    if (x.kind == NodeKind::cte) out.insert(to_lower(x.name));
    return true;
  });
  return out;
}

std::vector<JoinCandidate> join_sites(const Ctx& ctx) {
  std::vector<JoinCandidate> out;
  auto ctes = cte_names(ctx.tree.root);
  for (std::size_t si = 0; si < ctx.an.scopes.size(); ++si) {
    const CoreScope& sc = ctx.an.scopes[si];
    const AstNode& core = ctx.at(sc.path);
    std::optional<NodePath> from_path;
    for (std::size_t i = 0; i < core.children.size(); ++i) {
      if (core.children[i].is_clause(ClauseKind::from)) from_path = child_of(sc.path, i);
    }
    if (!from_path) continue;
    if (!ctx.is_top_core(sc.path)) {
      const AstNode* sel = ast::find_clause(core, ClauseKind::select);
      bool bare_star = sel && std::any_of(sel->children.begin(), sel->children.end(), [](const AstNode& c) {
                         return c.kind == NodeKind::star && c.qualifier.empty();
                       });
      if (bare_star) continue;
    }
    auto blocked = blocked_names(ctx, static_cast<int>(si));
    std::vector<std::string> present;
    for (const auto& src : sc.sources) {
      if (!src.table.empty()) present.push_back(src.table);
    }
    for (const auto& src : sc.sources) {
      if (src.table.empty() || src.visible_name.empty()) continue;
      for (const auto& edge : neighbors(ctx.graph, src.table)) {
        if (mentions_name(present, edge.neighbor) || ctes.count(to_lower(edge.neighbor))) continue;
        const TableDef* def = ctx.schema.find_table(edge.neighbor);
        if (!def) continue;
        bool clash = std::any_of(def->columns.begin(), def->columns.end(),
                                 [&](const ColumnDef& c) { return mentions_name(blocked, c.name); });
        if (clash) continue;
        out.push_back({*from_path, static_cast<int>(si), src.visible_name, edge});
      }
    }
  }
  return out;
}

std::string initials(std::string_view table) {
  std::string out;
  bool start = true;
  for (char ch : table) {
    if (ch == '_' || ch == ' ' || ch == '-') {
      start = true;
      continue;
    }
    if (start && std::isalpha(static_cast<unsigned char>(ch))) out += static_cast<char>(std::tolower(ch));
    start = false;
  }
  return out.empty() ? std::string("t") : out;
}

MutationPlan plan_join_candidate(const Ctx& ctx, const JoinCandidate& cand, ast::JoinKind kind) {
  std::vector<std::string> used;
  bool any_alias = false;
  for (const auto& sc : ctx.an.scopes) {
    for (const auto& src : sc.sources) {
      used.push_back(src.visible_name);
      if (!src.table.empty()) used.push_back(src.table);
    }
  }
  for (const auto& src : ctx.an.scopes[cand.scope].sources) {
    if (!iequals(src.visible_name, src.table)) any_alias = true;
  }
  std::string table = schema_identifier(cand.edge.neighbor);
  std::string visible = table;
  std::string alias;
  if (any_alias || mentions_name(used, table)) {
    std::string base = initials(cand.edge.neighbor);
    alias = base;
    for (int k = 2; mentions_name(used, alias) || is_reserved_word(alias); ++k) alias = base + std::to_string(k);
    visible = alias;
  }
  std::vector<AstNode> eqs;
  for (const auto& pair : cand.edge.columns) {
    eqs.push_back(ast::make_op("=", {ast::make_column(cand.existing, schema_identifier(pair.local)),
                                     ast::make_column(visible, schema_identifier(pair.neighbor))}));
  }
  AstNode cond = eqs.size() == 1 ? std::move(eqs[0]) : ast::make_logical(ast::Connective::and_, std::move(eqs));
  MutationPlan plan;
  plan.op = OperatorId::join;
  plan.target_path = cand.from_path;
  plan.original = ctx.at(cand.from_path);
  plan.payload = ast::make_join(kind, ast::make_table(table, alias), std::move(cond));
  plan.symbol = table;
  plan.description = "joining " + std::string(cand.edge.neighbor) + " on " + render_node(plan.payload.children[1]);
  return plan;
}

// ---- NEST --------------------------------------------------------------------

struct NestSite {
  NodePath path;
  NodePath column;  // the compared column reference
};

std::vector<NestSite> nest_sites(const Ctx& ctx) {
  std::vector<NestSite> out;
  for (const auto& e : ctx.exprs) {
    if (e.clause != ClauseKind::where && e.clause != ClauseKind::having) continue;
    const AstNode& lit = ctx.at(e.path);
    if (!is_value_literal(lit) || e.path.empty()) continue;
    NodePath parent = parent_of(e.path);
    const AstNode& cmp = ctx.at(parent);
    if (!is_comparison(cmp)) continue;
    std::size_t other = e.path.back() == 0 ? 1 : 0;
    NodePath col = child_of(parent, other);
    const ColumnResolution* r = ctx.an.resolution_at(col);
    if (!r || r->alias_ref || r->table.empty()) continue;
    int scope = ctx.an.scope_index(e.core);
    if (scope < 0 || ctx.an.scopes[scope].depth != ctx.max_depth) continue;
    out.push_back({e.path, col});
  }
  return out;
}

AstNode scalar_subquery(AstNode select_expr, const std::string& table, std::optional<AstNode> where, bool limit1) {
  AstNode core;
  core.kind = NodeKind::select_core;
  core.children.push_back(ast::make_clause(ClauseKind::select, {std::move(select_expr)}));
  core.children.push_back(ast::make_clause(ClauseKind::from, {ast::make_table(schema_identifier(table))}));
  if (where) core.children.push_back(ast::make_clause(ClauseKind::where, {std::move(*where)}));
  if (limit1) core.children.push_back(ast::make_clause(ClauseKind::limit, {ast::make_integer(1)}));
  return ast::make_subquery(std::move(core));
}

MutationPlan plan_nest(const Ctx& ctx, const NestSite& site, ValueSampler* sampler, Rng& rng) {
  const AstNode& lit = ctx.at(site.path);
  const AstNode& cmp = ctx.at(parent_of(site.path));
  const ColumnResolution* r = ctx.an.resolution_at(site.column);
  AstNode col = ast::make_column({}, schema_identifier(r->column.name));
  bool range = cmp.name != "=" && cmp.name != "<>" && cmp.name != "!=";
  bool text = lit.literal == ast::LiteralKind::string;
  MutationPlan plan;
  plan.op = OperatorId::nest;
  plan.target_path = site.path;
  plan.original = lit;

  if (range) {
    std::string f = text ? (cmp.name[0] == '<' ? "MAX" : "MIN") : "AVG";
    plan.payload = scalar_subquery(ast::make_function(f, {col}), r->table, std::nullopt, false);
    plan.symbol = f;
  } else {
    std::optional<AstNode> lookup;
    const TableDef* def = ctx.schema.find_table(r->table);
    for (const auto& fk : def ? def->foreign_keys : std::vector<ForeignKey>{}) {
      if (fk.columns.size() != 1 || !iequals(fk.columns[0], r->column.name)) continue;
      const TableDef* ref = ctx.schema.find_table(fk.referenced_table);
      if (!ref || fk.referenced_columns.size() != 1) continue;
      std::vector<const ColumnDef*> labels;
      for (const auto& c : ref->columns) {
        if (c.affinity == Affinity::text && !iequals(c.name, fk.referenced_columns[0])) labels.push_back(&c);
      }
      if (labels.empty()) continue;
      const ColumnDef* label = labels[rng.pick(labels.size())];
      std::string key = ident(fk.referenced_columns[0]);
      auto v = sample(sampler,
                      "SELECT " + ident(label->name) + " FROM " + ident(ref->name) + " WHERE " + key + " = " +
                          render_node(lit) + " LIMIT 1",
                      1);
      if (v.empty()) continue;
      auto label_lit = literal_from(v[0]);
      if (!label_lit) continue;
      lookup = scalar_subquery(
          ast::make_column({}, schema_identifier(fk.referenced_columns[0])), ref->name,
          ast::make_op("=", {ast::make_column({}, schema_identifier(label->name)), std::move(*label_lit)}), true);
      plan.symbol = "lookup";
      break;
    }
    if (lookup) {
      plan.payload = std::move(*lookup);
    } else {
      plan.payload = scalar_subquery(ast::make_function("MAX", {col}), r->table, ast::make_op("=", {col, lit}), false);
      plan.symbol = "MAX";
    }
  }
  plan.description = "comparing against " + render_node(plan.payload);
  return plan;
}

// ---- SET ---------------------------------------------------------------------

AstNode perturbed_copy(const Ctx& ctx, ValueSampler* sampler, Rng& rng, std::string& what) {
  AstNode copy = ctx.tree.root;
  std::vector<NodePath> preds;
  for (const auto& e : ctx.exprs) {
    if (e.clause != ClauseKind::where) continue;
    const AstNode& n = ctx.at(e.path);
    if (is_comparison(n) && is_value_literal(n.children[1]) && n.children[0].kind != NodeKind::literal)
      preds.push_back(e.path);
  }
  if (!preds.empty()) {
    const NodePath& p = preds[rng.pick(preds.size())];
    AstNode& cmp = ast::node_at(copy, p);
    const ColumnResolution* r =
        cmp.children[0].kind == NodeKind::column_ref ? ctx.an.resolution_at(child_of(p, 0)) : nullptr;
    if (auto v = other_value(ctx, r, cmp.children[1], sampler, rng)) {
      cmp.children[1] = std::move(*v);
    } else {
      static const std::pair<const char*, const char*> flips[] = {{"=", "<>"}, {"<>", "="}, {"!=", "="},
                                                                  {"<", ">="}, {"<=", ">"}, {">", "<="},
                                                                  {">=", "<"}};
      for (const auto& [from, to] : flips) {
        if (cmp.name == from) {
          cmp.name = to;
          break;
        }
      }
    }
    what = render_node(cmp);
    return copy;
  }
  for (std::size_t si = 0; si < ctx.an.scopes.size(); ++si) {
    const CoreScope& sc = ctx.an.scopes[si];
    if (!ctx.is_top_core(sc.path) || ctx.scope_columns(static_cast<int>(si)).empty()) continue;
    LogicSite site{sc.path, static_cast<int>(si), ClauseKind::where, true};
    AstNode e = where_predicate(ctx, site, false, sampler, rng);
    AstNode& core = ast::node_at(copy, sc.path);
    if (AstNode* w = ast::find_clause(core, ClauseKind::where)) {
      w->children[0] = ast::make_logical(ast::Connective::and_, {w->children[0], e});
    } else {
      ast::insert_clause(core, ast::make_clause(ClauseKind::where, {e}));
    }
    what = render_node(e);
    return copy;
  }
  what = "an identical query";
  return copy;
}

std::string set_keyword_slug(ast::SetOpKind k) { return std::string(ast::set_op_keyword(k)); }

MutationPlan plan_set(const Ctx& ctx, ValueSampler* sampler, Rng& rng) {
  std::string what;
  AstNode second = perturbed_copy(ctx, sampler, rng, what);
  static const ast::SetOpKind kinds[] = {ast::SetOpKind::union_distinct, ast::SetOpKind::intersect,
                                         ast::SetOpKind::except};
  std::size_t start = rng.pick(3);
  ast::SetOpKind chosen = kinds[start];
  if (sampler) {
    for (std::size_t k = 0; k < 3; ++k) {
      ast::SetOpKind kind = kinds[(start + k) % 3];
      ast::SqlAst candidate{ast::make_set_op(kind, ctx.tree.root, second)};
      if (!sampler->probe("SELECT 1 FROM (" + render_sql(candidate) + ") LIMIT 1", 1).empty()) {
        chosen = kind;
        break;
      }
    }
  }
  MutationPlan plan;
  plan.op = OperatorId::set;
  plan.target_path = {};
  plan.original = ctx.tree.root;
  plan.payload = std::move(second);
  plan.set_kind = chosen;
  plan.symbol = set_keyword_slug(chosen);
  plan.description = "combined by " + plan.symbol + " with the variant using " + what;
  return plan;
}

FeasibilityReport report_for(OperatorId op, std::vector<NodePath> sites, double saturation, std::string detail) {
  FeasibilityReport rep;
  rep.op = op;
  rep.eligible_sites = std::move(sites);
  rep.score = rep.eligible_sites.empty() ? 0.0
                                         : std::min(1.0, static_cast<double>(rep.eligible_sites.size()) / saturation);
  rep.justification = std::to_string(rep.eligible_sites.size()) + " eligible site(s): " + detail;
  return rep;
}

}  // namespace

FeasibilityReport check_applicability(const ast::SqlAst& tree, const DatabaseSchema& schema, OperatorId op,
                                      const PlannerOptions& options) {
  Ctx ctx(tree, schema, options);
  std::vector<NodePath> paths;
  switch (op) {
    case OperatorId::func:
      return report_for(op, func_sites(ctx), options.saturation, "column references a function can wrap");
    case OperatorId::op:
      for (const auto& s : op_sites(ctx)) paths.push_back(s.path);
      return report_for(op, paths, options.saturation, "comparisons, projections and sort expressions");
    case OperatorId::logic:
      for (const auto& s : logic_sites(ctx)) paths.push_back(s.path);
      return report_for(op, paths, options.saturation, "WHERE, HAVING and ORDER BY clauses");
    case OperatorId::join:
      for (const auto& c : join_sites(ctx)) {
        if (paths.empty() || paths.back() != c.from_path) paths.push_back(c.from_path);
      }
      return report_for(op, paths, options.saturation, "FROM clauses with foreign keys to unjoined tables");
    case OperatorId::nest:
      for (const auto& s : nest_sites(ctx)) paths.push_back(s.path);
      return report_for(op, paths, options.saturation, "literals compared against a column");
    case OperatorId::set:
      return report_for(op, {NodePath{}}, options.saturation, "the root query");
  }
  return {};
}

MutationPlan plan_mutation(const ast::SqlAst& tree, const DatabaseSchema& schema, OperatorId op, std::uint64_t seed,
                           ValueSampler* sampler, const PlannerOptions& options) {
  Ctx ctx(tree, schema, options);
  Rng rng(seed);
  auto infeasible = [&]() -> PreconditionError {
    return PreconditionError(std::string(operator_code(op)) + " has no eligible site");
  };
  switch (op) {
    case OperatorId::func: {
      auto sites = func_sites(ctx);
      if (sites.empty()) throw infeasible();
      return plan_func(ctx, sites[rng.pick(sites.size())], rng);
    }
    case OperatorId::op: {
      auto sites = op_sites(ctx);
      if (sites.empty()) throw infeasible();
      return plan_op(ctx, sites[rng.pick(sites.size())], sampler, rng);
    }
    case OperatorId::logic: {
      auto sites = logic_sites(ctx);
      if (sites.empty()) throw infeasible();
      return plan_logic(ctx, sites[rng.pick(sites.size())], sampler, rng);
    }
    case OperatorId::join: {
      auto cands = join_sites(ctx);
      if (cands.empty()) throw infeasible();
      // Pick the site first so every FROM clause is equally likely, then the edge.
      std::vector<NodePath> sites;
      for (const auto& c : cands) {
        if (std::find(sites.begin(), sites.end(), c.from_path) == sites.end()) sites.push_back(c.from_path);
      }
      const NodePath& site = sites[rng.pick(sites.size())];
      std::vector<const JoinCandidate*> here;
      for (const auto& c : cands) {
        if (c.from_path == site) here.push_back(&c);
      }
      const JoinCandidate& cand = *here[rng.pick(here.size())];
      auto kind = rng.chance(options.left_join_probability) ? ast::JoinKind::left : ast::JoinKind::inner;
      return plan_join_candidate(ctx, cand, kind);
    }
    case OperatorId::nest: {
      auto sites = nest_sites(ctx);
      if (sites.empty()) throw infeasible();
      return plan_nest(ctx, sites[rng.pick(sites.size())], sampler, rng);
    }
    case OperatorId::set:
      return plan_set(ctx, sampler, rng);
  }
  throw infeasible();
}

std::vector<MutationPlan> join_candidates(const ast::SqlAst& tree, const DatabaseSchema& schema) {
  PlannerOptions options;
  Ctx ctx(tree, schema, options);
  std::vector<MutationPlan> out;
  for (const auto& c : join_sites(ctx)) out.push_back(plan_join_candidate(ctx, c, ast::JoinKind::inner));
  return out;
}

MutationPlan make_logic_plan(const ast::SqlAst& tree, const NodePath& site, std::optional<ClauseKind> create,
                             ast::Connective connective, AstNode e_new) {
  const AstNode& node = ast::node_at(tree.root, site);
  ClauseKind kind;
  if (create) {
    if (node.kind != NodeKind::select_core) throw StructuralError("clause creation needs a select-core site");
    if (ast::find_clause(node, *create)) throw StructuralError("clause already present");
    kind = *create;
  } else {
    if (node.kind != NodeKind::clause) throw StructuralError("LOGIC site must be a clause");
    kind = node.clause;
  }
  if (kind != ClauseKind::where && kind != ClauseKind::having && kind != ClauseKind::order_by)
    throw StructuralError("LOGIC site must be WHERE, HAVING or ORDER BY");
  if (connective == ast::Connective::not_) throw StructuralError("LOGIC connector must be AND or OR");
  if (kind == ClauseKind::order_by && e_new.kind != NodeKind::sort_key)
    e_new = ast::make_sort_key(std::move(e_new), ast::SortOrder::none);

  MutationPlan plan;
  plan.op = OperatorId::logic;
  plan.target_path = site;
  plan.original = node;
  plan.create_clause = create;
  plan.connective = connective;
  plan.symbol = kind == ClauseKind::order_by ? "ORDER BY" : std::string(ast::connective_keyword(connective));
  plan.payload = std::move(e_new);
  if (kind == ClauseKind::order_by) {
    plan.description = "then ordering by " + render_node(plan.payload);
  } else if (create || connective == ast::Connective::and_) {
    plan.description = std::string(kind == ClauseKind::having ? "keeping only groups where " : "where ") +
                       render_node(plan.payload);
  } else {
    plan.description = "or where " + render_node(plan.payload);
  }
  return plan;
}

ast::SqlAst apply_mutation(const ast::SqlAst& tree, const MutationPlan& plan) {
  ast::SqlAst out = tree;
  auto fail = [&](const std::string& why) -> StructuralError {
    return StructuralError(std::string(operator_code(plan.op)) + " plan does not fit the tree: " + why);
  };
  AstNode* target = nullptr;
  try {
    target = &ast::node_at(out.root, plan.target_path);
  } catch (const StructuralError&) {
    throw fail("target path " + ast::path_to_string(plan.target_path) + " does not resolve");
  }
  if (!(*target == plan.original)) throw fail("target node differs from the planned one");

  auto check_hole = [&]() {
    const AstNode* inside = nullptr;
    const AstNode* embedded = nullptr;
    try {
      inside = &ast::node_at(plan.payload, plan.hole);
      embedded = &ast::node_at(plan.original, plan.embedded);
    } catch (const StructuralError&) {
      throw fail("payload hole does not resolve");
    }
    if (!(*inside == *embedded)) throw fail("payload does not embed the target expression");
  };

  switch (plan.op) {
    case OperatorId::func:
      if (target->kind != NodeKind::column_ref) throw fail("FUNC target must be a column reference");
      if (plan.payload.kind != NodeKind::function) throw fail("FUNC payload must be a function");
      check_hole();
      *target = plan.payload;
      break;
    case OperatorId::op:
      if (!is_omega(plan.payload)) throw fail("OP payload must be CASE, BETWEEN, IN, NOT IN or LIKE");
      if (plan.hole.size() != 1) throw fail("OP payload must hold the expression as a direct child");
      check_hole();
      *target = plan.payload;
      break;
    case OperatorId::logic: {
      if (plan.create_clause) {
        if (target->kind != NodeKind::select_core) throw fail("clause creation needs a select-core");
        if (ast::find_clause(*target, *plan.create_clause)) throw fail("clause already exists");
        ast::insert_clause(*target, ast::make_clause(*plan.create_clause, {plan.payload}));
      } else if (target->is_clause(ClauseKind::order_by)) {
        if (plan.payload.kind != NodeKind::sort_key) throw fail("ORDER BY expansion needs a sort key");
        target->children.push_back(plan.payload);
      } else if (target->is_clause(ClauseKind::where) || target->is_clause(ClauseKind::having)) {
        if (plan.connective == ast::Connective::not_) throw fail("connector must be AND or OR");
        target->children.at(0) = ast::make_logical(plan.connective, {target->children.at(0), plan.payload});
      } else {
        throw fail("LOGIC target must be WHERE, HAVING or ORDER BY");
      }
      break;
    }
    case OperatorId::join:
      if (!target->is_clause(ClauseKind::from)) throw fail("JOIN target must be a FROM clause");
      if (plan.payload.kind != NodeKind::join) throw fail("JOIN payload must be a join node");
      target->children.push_back(plan.payload);
      break;
    case OperatorId::nest: {
      if (target->kind != NodeKind::literal) throw fail("NEST target must be a literal");
      if (plan.target_path.empty() || !is_comparison(ast::node_at(out.root, parent_of(plan.target_path))))
        throw fail("NEST target must sit in a comparison");
      if (plan.payload.kind != NodeKind::subquery) throw fail("NEST payload must be a subquery");
      *target = plan.payload;
      break;
    }
    case OperatorId::set:
      if (!plan.target_path.empty()) throw fail("SET target must be the root");
      if (!plan.payload.is_query()) throw fail("SET payload must be a query");
      out.root = ast::make_set_op(plan.set_kind, std::move(out.root), plan.payload);
      break;
  }
  auto violations = ast::invariant_violations(out.root);
  if (!violations.empty()) throw fail(violations.front());
  return out;
}

int omega_count(const ast::SqlAst& tree) {
  int n = 0;
  ast::walk(tree.root, [&](const AstNode& x, const NodePath&) {
    if (is_omega(x)) ++n;
    return true;
  });
  return n;
}

int associated_feature(OperatorId op, const ast::SqlAst& tree) {
  switch (op) {
    case OperatorId::func: return extract_features(tree).functions;
    case OperatorId::op: return extract_features(tree).tokens;
    case OperatorId::logic: return clause_width(tree).total();
    case OperatorId::join: return extract_features(tree).joins;
    case OperatorId::nest: {
      auto f = extract_features(tree);
      return f.subqueries + f.ctes;
    }
    case OperatorId::set: return top_level_set_ops(tree);
  }
  return 0;
}

}  // namespace sqlforge
