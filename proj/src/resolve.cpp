#include "sqlforge/resolve.hpp"

#include "sqlforge/error.hpp"
#include "sqlforge/render.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

using ast::AstNode;
using ast::ClauseKind;
using ast::NodeKind;
using ast::NodePath;

namespace {

NodePath extend(NodePath p, std::size_t i) {
  p.push_back(i);
  return p;
}

NodePath extend(NodePath p, std::initializer_list<std::size_t> more) {
  p.insert(p.end(), more);
  return p;
}

const ColumnDef* find_in(const std::vector<ColumnDef>& cols, std::string_view name) {
  for (const auto& c : cols) {
    if (iequals(c.name, name)) return &c;
  }
  return nullptr;
}

struct CteBinding {
  std::string name;
  std::vector<ColumnDef> columns;
};
using CteEnv = std::vector<CteBinding>;

class Analyzer {
 public:
  Analyzer(const AstNode& root, const DatabaseSchema& schema) : root_(root), schema_(schema) {}

  ScopeAnalysis run() {
    visit_query(root_, {}, -1, 1, {});
    return std::move(out_);
  }

 private:
  const AstNode& root_;
  const DatabaseSchema& schema_;
  ScopeAnalysis out_;
  std::map<NodePath, std::size_t> index_;

  std::vector<ColumnDef> visit_query(const AstNode& q, const NodePath& path, int parent, int depth, CteEnv env) {
    std::vector<ColumnDef> cols;
    if (q.kind == NodeKind::set_op) {
      cols = visit_query(q.children.at(0), extend(path, 0), parent, depth, env);
      visit_query(q.children.at(1), extend(path, 1), parent, depth, env);
    } else if (q.kind == NodeKind::select_core) {
      cols = visit_core(q, path, parent, depth, std::move(env));
    } else {
      throw StructuralError("expected a query node at " + ast::path_to_string(path));
    }
    out_.outputs[path] = cols;
    return cols;
  }

  std::vector<ColumnDef> visit_core(const AstNode& core, const NodePath& path, int parent, int depth, CteEnv env) {
    for (std::size_t ci = 0; ci < core.children.size(); ++ci) {
      const AstNode& clause = core.children[ci];
      if (!clause.is_clause(ClauseKind::with)) continue;
      for (std::size_t i = 0; i < clause.children.size(); ++i) {
        const AstNode& cte = clause.children[i];
        auto cols = visit_query(cte.children.at(0), extend(path, {ci, i, 0}), parent, depth + 1, env);
        env.push_back({cte.name, std::move(cols)});
      }
    }

    int scope = static_cast<int>(out_.scopes.size());
    out_.scopes.push_back(CoreScope{path, parent, depth, {}, {}});

    for (std::size_t ci = 0; ci < core.children.size(); ++ci) {
      const AstNode& clause = core.children[ci];
      if (!clause.is_clause(ClauseKind::from)) continue;
      for (std::size_t j = 0; j < clause.children.size(); ++j) {
        const AstNode& item = clause.children[j];
        bool is_join = item.kind == NodeKind::join;
        const AstNode& src = is_join ? item.children.at(0) : item;
        NodePath src_path = is_join ? extend(path, {ci, j, 0}) : extend(path, {ci, j});
        add_source(scope, src, src_path, depth, env);
      }
    }

    if (const AstNode* sel = ast::find_clause(core, ClauseKind::select)) {
      for (const auto& item : sel->children) {
        if (item.kind == NodeKind::alias) out_.scopes[scope].select_aliases.push_back(item.name);
      }
    }

    for (std::size_t ci = 0; ci < core.children.size(); ++ci) {
      const AstNode& clause = core.children[ci];
      if (clause.is_clause(ClauseKind::with)) continue;
      if (clause.is_clause(ClauseKind::from)) {
        for (std::size_t j = 0; j < clause.children.size(); ++j) {
          const AstNode& item = clause.children[j];
          if (item.kind == NodeKind::join && item.children.size() > 1) {
            visit_expr(item.children[1], extend(path, {ci, j, 1}), scope, ClauseKind::from, false, false, env);
          }
        }
        continue;
      }
      for (std::size_t k = 0; k < clause.children.size(); ++k) {
        visit_expr(clause.children[k], extend(path, {ci, k}), scope, clause.clause, false, false, env);
      }
    }

    return core_outputs(core, path, scope);
  }

  void add_source(int scope, const AstNode& src, const NodePath& src_path, int depth, const CteEnv& env) {
    ScopeSource s;
    s.path = src_path;
    if (src.kind == NodeKind::subquery) {
      s.derived = true;
      s.visible_name = src.alias;
      int parent = out_.scopes[scope].parent;
      s.columns = visit_query(src.children.at(0), extend(src_path, 0), parent, depth + 1, env);
    } else {
      s.visible_name = src.alias.empty() ? src.name : src.alias;
      const CteBinding* cte = nullptr;
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (iequals(it->name, src.name)) {
          cte = &*it;
          break;
        }
      }
      if (cte) {
        s.is_cte = true;
        s.columns = cte->columns;
      } else if (const TableDef* def = schema_.find_table(src.name)) {
        s.table = def->name;
        s.columns = def->columns;
        if (!src.alias.empty()) out_.alias_map[src.alias] = def->name;
      } else {
        s.known = false;
        out_.unresolved_tables.push_back(src.name);
      }
    }
    out_.scopes[scope].sources.push_back(std::move(s));
  }

  void visit_expr(const AstNode& n, const NodePath& path, int scope, ClauseKind clause, bool in_agg, bool in_win,
                  const CteEnv& env) {
    switch (n.kind) {
      case NodeKind::column_ref:
        bind(n, path, scope, clause, in_agg, in_win);
        return;
      case NodeKind::subquery:
        visit_query(n.children.at(0), extend(path, 0), scope, out_.scopes[scope].depth + 1, env);
        return;
      case NodeKind::select_core:
      case NodeKind::set_op:
        visit_query(n, path, scope, out_.scopes[scope].depth + 1, env);
        return;
      case NodeKind::function: {
        bool window = n.is_window_call();
        bool agg = !window && ast::is_aggregate_name(n.name);
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          visit_expr(n.children[i], extend(path, i), scope, clause, in_agg || agg, in_win || window, env);
        }
        return;
      }
      default:
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          visit_expr(n.children[i], extend(path, i), scope, clause, in_agg, in_win, env);
        }
    }
  }

  bool alias_visible(int scope, std::string_view name) const {
    for (const auto& a : out_.scopes[scope].select_aliases) {
      if (iequals(a, name)) return true;
    }
    return false;
  }

  void record(ColumnResolution r, bool ok) {
    if (ok) {
      index_[r.path] = out_.resolved.size();
      out_.resolved.push_back(std::move(r));
    } else {
      out_.unresolved.push_back(std::move(r));
    }
  }

  void bind(const AstNode& n, const NodePath& path, int scope, ClauseKind clause, bool in_agg, bool in_win) {
    ColumnResolution r;
    r.path = path;
    r.text = n.qualifier.empty() ? n.name : n.qualifier + "." + n.name;
    r.scope = scope;
    r.clause = clause;
    r.in_aggregate = in_agg;
    r.in_window = in_win;

    auto bind_to = [&](int s, int src, const ColumnDef& col) {
      const ScopeSource& source = out_.scopes[s].sources[src];
      r.bound_scope = s;
      r.source = src;
      r.table = source.table;
      r.column = col;
    };

    if (!n.qualifier.empty()) {
      for (int s = scope; s != -1; s = out_.scopes[s].parent) {
        const auto& sources = out_.scopes[s].sources;
        for (std::size_t i = 0; i < sources.size(); ++i) {
          if (!iequals(sources[i].visible_name, n.qualifier)) continue;
          const ColumnDef* col = sources[i].known ? find_in(sources[i].columns, n.name) : nullptr;
          if (col) bind_to(s, static_cast<int>(i), *col);
          record(std::move(r), col != nullptr);
          return;
        }
      }
      record(std::move(r), false);
      return;
    }

    auto bind_alias = [&](int s) {
      r.bound_scope = s;
      r.alias_ref = true;
      r.column.name = n.name;
      record(std::move(r), true);
    };

    if (clause == ClauseKind::order_by && alias_visible(scope, n.name)) {
      bind_alias(scope);
      return;
    }
    for (int s = scope; s != -1; s = out_.scopes[s].parent) {
      const auto& sources = out_.scopes[s].sources;
      std::vector<std::string> candidates;
      int hit = -1;
      const ColumnDef* col = nullptr;
      for (std::size_t i = 0; i < sources.size(); ++i) {
        if (!sources[i].known) continue;
        if (const ColumnDef* c = find_in(sources[i].columns, n.name)) {
          candidates.push_back(sources[i].visible_name + "." + c->name);
          hit = static_cast<int>(i);
          col = c;
        }
      }
      if (candidates.size() > 1) throw AmbiguityError(n.name, candidates);
      if (col) {
        bind_to(s, hit, *col);
        record(std::move(r), true);
        return;
      }
      if (s == scope && clause != ClauseKind::select && alias_visible(scope, n.name)) {
        bind_alias(scope);
        return;
      }
    }
    record(std::move(r), false);
  }

  std::vector<ColumnDef> core_outputs(const AstNode& core, const NodePath& path, int scope) {
    std::vector<ColumnDef> cols;
    std::size_t sel_index = 0;
    const AstNode* sel = nullptr;
    for (std::size_t ci = 0; ci < core.children.size(); ++ci) {
      if (core.children[ci].is_clause(ClauseKind::select)) {
        sel = &core.children[ci];
        sel_index = ci;
      }
    }
    if (!sel) return cols;
    const auto& sources = out_.scopes[scope].sources;
    for (std::size_t k = 0; k < sel->children.size(); ++k) {
      const AstNode& item = sel->children[k];
      NodePath item_path = extend(path, {sel_index, k});
      if (item.kind == NodeKind::star) {
        for (const auto& s : sources) {
          if (item.qualifier.empty() || iequals(item.qualifier, s.visible_name)) {
            cols.insert(cols.end(), s.columns.begin(), s.columns.end());
          }
        }
        continue;
      }
      ColumnDef def;
      if (item.kind == NodeKind::alias) {
        def.name = item.name;
        def.affinity = affinity_of(item.children.at(0), extend(item_path, 0));
        if (item.children[0].kind == NodeKind::column_ref) {
          if (auto it = index_.find(extend(item_path, 0)); it != index_.end()) {
            def.declared_type = out_.resolved[it->second].column.declared_type;
          }
        }
      } else if (item.kind == NodeKind::column_ref) {
        def.name = item.name;
        if (auto it = index_.find(item_path); it != index_.end()) {
          def = out_.resolved[it->second].column;
          def.name = item.name;
        }
      } else {
        def.name = render_node(item);
        def.affinity = affinity_of(item, item_path);
      }
      cols.push_back(std::move(def));
    }
    return cols;
  }

  Affinity affinity_of(const AstNode& n, const NodePath& path) const { return expression_affinity(out_, n, path); }
};

}  // namespace

const ColumnResolution* ScopeAnalysis::resolution_at(const NodePath& path) const {
  for (const auto& r : resolved) {
    if (r.path == path) return &r;
  }
  return nullptr;
}

const CoreScope* ScopeAnalysis::scope_at(const NodePath& core_path) const {
  int i = scope_index(core_path);
  return i < 0 ? nullptr : &scopes[i];
}

int ScopeAnalysis::scope_index(const NodePath& core_path) const {
  for (std::size_t i = 0; i < scopes.size(); ++i) {
    if (scopes[i].path == core_path) return static_cast<int>(i);
  }
  return -1;
}

ScopeAnalysis analyze_scopes(const ast::SqlAst& tree, const DatabaseSchema& schema) {
  return Analyzer(tree.root, schema).run();
}

Affinity expression_affinity(const ScopeAnalysis& analysis, const AstNode& n, const NodePath& path) {
  auto child = [&](std::size_t i) { return expression_affinity(analysis, n.children[i], extend(path, i)); };
  switch (n.kind) {
    case NodeKind::column_ref: {
      const ColumnResolution* r = analysis.resolution_at(path);
      return r && !r->alias_ref ? r->column.affinity : Affinity::numeric;
    }
    case NodeKind::literal:
      switch (n.literal) {
        case ast::LiteralKind::integer: return Affinity::integer;
        case ast::LiteralKind::real: return Affinity::real;
        case ast::LiteralKind::string: return Affinity::text;
        case ast::LiteralKind::blob: return Affinity::blob;
        default: return Affinity::numeric;
      }
    case NodeKind::function: {
      const std::string& f = n.name;
      if (f == "COUNT" || f == "LENGTH" || f == "INSTR") return Affinity::integer;
      if (f == "AVG" || f == "ROUND" || f == "TOTAL" || f == "JULIANDAY") return Affinity::real;
      if (f == "UPPER" || f == "LOWER" || f == "SUBSTR" || f == "STRFTIME" || f == "GROUP_CONCAT" || f == "TRIM" ||
          f == "REPLACE" || f == "DATE" || f == "TIME" || f == "DATETIME")
        return Affinity::text;
      if (f == "CAST") return affinity_from_declared_type(n.type_name);
      if ((f == "SUM" || f == "MIN" || f == "MAX" || f == "ABS" || f == "COALESCE" || f == "IFNULL") &&
          !n.children.empty() && n.children[0].kind != NodeKind::window_spec)
        return child(0);
      return Affinity::numeric;
    }
    case NodeKind::op: {
      const std::string& s = n.name;
      if (s == "||") return Affinity::text;
      if (s == "CASE") {
        std::size_t then = n.case_base ? 2 : 1;
        return then < n.children.size() ? child(then) : Affinity::numeric;
      }
      if (s == "+" || s == "-" || s == "*" || s == "/" || s == "%") {
        if (n.children.size() == 1) return child(0);
        Affinity a = child(0);
        Affinity b = child(1);
        if (a == Affinity::real || b == Affinity::real) return Affinity::real;
        if (a == Affinity::integer && b == Affinity::integer) return Affinity::integer;
        return Affinity::numeric;
      }
      return Affinity::integer;  // comparisons and predicates yield 0/1
    }
    case NodeKind::subquery: {
      auto it = analysis.outputs.find(extend(path, 0));
      if (it != analysis.outputs.end() && !it->second.empty()) return it->second.front().affinity;
      return Affinity::numeric;
    }
    case NodeKind::logical:
      return Affinity::integer;
    default:
      return Affinity::numeric;
  }
}

BindingReport resolve_references(const ast::SqlAst& tree, const DatabaseSchema& schema) {
  ScopeAnalysis a = analyze_scopes(tree, schema);
  BindingReport report;
  for (const auto& r : a.resolved) {
    std::string target;
    if (r.alias_ref) {
      target = "AS " + r.column.name;
    } else if (!r.table.empty()) {
      target = r.table;
    } else {
      target = a.scopes[r.bound_scope].sources[r.source].visible_name;
    }
    report.resolved.push_back({r.text, target, r.path});
  }
  for (const auto& r : a.unresolved) report.unresolved.push_back(r.text);
  report.alias_map = a.alias_map;
  report.unresolved_tables = a.unresolved_tables;
  return report;
}

}  // namespace sqlforge
