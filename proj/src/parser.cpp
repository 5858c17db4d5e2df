#include "sqlforge/parser.hpp"

#include <optional>

#include "sqlforge/error.hpp"
#include "sqlforge/lexer.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

using ast::AstNode;
using ast::ClauseKind;
using ast::NodeKind;

namespace {

constexpr int kPrecOr = 1;
constexpr int kPrecAnd = 2;
constexpr int kPrecNot = 3;
constexpr int kPrecEquality = 4;
constexpr int kPrecRelational = 5;
constexpr int kPrecBitwise = 6;
constexpr int kPrecAdditive = 7;
constexpr int kPrecMultiplicative = 8;
constexpr int kPrecConcat = 9;
constexpr int kPrecUnary = 10;

bool is_wrap_shape(const AstNode& core) {
  if (core.kind != NodeKind::select_core || core.children.size() != 2) return false;
  const AstNode* sel = ast::find_clause(core, ClauseKind::select);
  const AstNode* from = ast::find_clause(core, ClauseKind::from);
  if (!sel || !from || sel->distinct || sel->children.size() != 1) return false;
  const AstNode& item = sel->children[0];
  if (item.kind != NodeKind::star || !item.qualifier.empty()) return false;
  if (from->children.size() != 1) return false;
  const AstNode& src = from->children[0];
  return src.kind == NodeKind::subquery && src.alias.empty();
}

AstNode unwrap_operand(AstNode node) {
  if (is_wrap_shape(node)) {
    AstNode inner = std::move(ast::find_clause(node, ClauseKind::from)->children[0].children[0]);
    return inner;
  }
  return node;
}

AstNode wrap_as_core(AstNode query) {
  AstNode core;
  core.kind = NodeKind::select_core;
  core.children.push_back(ast::make_clause(ClauseKind::select, {ast::make_star()}));
  core.children.push_back(ast::make_clause(ClauseKind::from, {ast::make_subquery(std::move(query))}));
  return core;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex_sql(text, true)) {}

  AstNode parse_statement() {
    if (peek().kind == TokenKind::end) fail("empty query");
    AstNode q = parse_query();
    while (accept_symbol(";")) {
    }
    if (peek().kind != TokenKind::end) fail("unexpected '" + peek().text + "'");
    return q;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = std::min(pos_ + k, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().position); }
  [[noreturn]] void unsupported(const std::string& what) const { throw UnsupportedError(what); }

  bool at_keyword(std::string_view kw, std::size_t k = 0) const { return peek(k).is_keyword(kw); }
  bool accept_keyword(std::string_view kw) {
    if (!at_keyword(kw)) return false;
    advance();
    return true;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail("expected " + std::string(kw));
  }
  bool accept_symbol(std::string_view s) {
    if (!peek().is_symbol(s)) return false;
    advance();
    return true;
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) fail("expected '" + std::string(s) + "'");
  }
  bool at_query_start(std::size_t k = 0) const { return at_keyword("SELECT", k) || at_keyword("WITH", k); }

  // Identifier usable as a name (bare non-reserved word or quoted).
  bool at_name(std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == TokenKind::quoted_identifier ||
           (t.kind == TokenKind::identifier && !is_reserved_word(t.text));
  }
  std::string expect_name(const char* what) {
    if (!at_name()) {
      if (peek().kind == TokenKind::identifier) fail(std::string("reserved word '") + peek().text + "' used as " + what);
      fail(std::string("expected ") + what);
    }
    const Token& t = advance();
    return ast::identifier_spelling(t.value, t.kind == TokenKind::quoted_identifier);
  }

  // ---- queries -------------------------------------------------------------

  AstNode parse_query() {
    std::optional<AstNode> with;
    if (accept_keyword("WITH")) {
      if (at_keyword("RECURSIVE")) unsupported("WITH RECURSIVE");
      AstNode clause = ast::make_clause(ClauseKind::with);
      do {
        AstNode cte;
        cte.kind = NodeKind::cte;
        cte.name = expect_name("CTE name");
        if (peek().is_symbol("(")) unsupported("CTE column list");
        expect_keyword("AS");
        if (at_keyword("MATERIALIZED") || (at_keyword("NOT") && at_keyword("MATERIALIZED", 1)))
          unsupported("MATERIALIZED hint");
        expect_symbol("(");
        cte.children.push_back(parse_query());
        expect_symbol(")");
        clause.children.push_back(std::move(cte));
      } while (accept_symbol(","));
      with = std::move(clause);
    }

    AstNode body = parse_compound();
    if (with) {
      if (body.kind == NodeKind::select_core && !ast::find_clause(body, ClauseKind::with)) {
        ast::insert_clause(body, std::move(*with));
      } else {
        AstNode core = wrap_as_core(std::move(body));
        ast::insert_clause(core, std::move(*with));
        body = std::move(core);
      }
    }
    return body;
  }

  std::optional<ast::SetOpKind> accept_set_op() {
    if (accept_keyword("UNION")) {
      if (accept_keyword("ALL")) return ast::SetOpKind::union_all;
      return ast::SetOpKind::union_distinct;
    }
    if (accept_keyword("INTERSECT")) return ast::SetOpKind::intersect;
    if (accept_keyword("EXCEPT")) return ast::SetOpKind::except;
    return std::nullopt;
  }

  AstNode parse_compound() {
    AstNode left = parse_operand();
    bool compound = false;
    while (auto op = accept_set_op()) {
      AstNode right = parse_operand();
      if (!compound) left = unwrap_operand(std::move(left));
      left = ast::make_set_op(*op, std::move(left), unwrap_operand(std::move(right)));
      compound = true;
    }

    std::optional<AstNode> order_by;
    std::optional<AstNode> limit;
    if (at_keyword("ORDER")) order_by = parse_order_by();
    if (at_keyword("LIMIT")) limit = parse_limit();
    if (!order_by && !limit) return left;

    bool attach_directly = left.kind == NodeKind::select_core &&
                           !(order_by && ast::find_clause(left, ClauseKind::order_by)) &&
                           !ast::find_clause(left, ClauseKind::limit);
    if (!attach_directly) left = wrap_as_core(std::move(left));
    if (order_by) ast::insert_clause(left, std::move(*order_by));
    if (limit) ast::insert_clause(left, std::move(*limit));
    return left;
  }

  AstNode parse_operand() {
    if (peek().is_symbol("(") && at_query_start(1)) {
      advance();
      AstNode q = parse_query();
      expect_symbol(")");
      return q;
    }
    if (at_keyword("VALUES")) unsupported("VALUES");
    if (!at_keyword("SELECT")) fail("expected SELECT");
    return parse_select_core();
  }

  AstNode parse_select_core() {
    expect_keyword("SELECT");
    AstNode core;
    core.kind = NodeKind::select_core;

    AstNode select = ast::make_clause(ClauseKind::select);
    if (accept_keyword("DISTINCT")) {
      select.distinct = true;
    } else {
      accept_keyword("ALL");
    }
    do {
      select.children.push_back(parse_select_item());
    } while (accept_symbol(","));
    core.children.push_back(std::move(select));

    if (accept_keyword("FROM")) core.children.push_back(parse_from());
    if (accept_keyword("WHERE")) core.children.push_back(ast::make_clause(ClauseKind::where, {parse_expr()}));
    if (at_keyword("GROUP")) {
      advance();
      expect_keyword("BY");
      AstNode group = ast::make_clause(ClauseKind::group_by);
      do {
        group.children.push_back(parse_expr());
      } while (accept_symbol(","));
      core.children.push_back(std::move(group));
    }
    if (accept_keyword("HAVING")) core.children.push_back(ast::make_clause(ClauseKind::having, {parse_expr()}));
    if (at_keyword("WINDOW")) unsupported("named WINDOW definitions");
    return core;
  }

  AstNode parse_select_item() {
    if (accept_symbol("*")) return ast::make_star();
    if (at_name() && peek(1).is_symbol(".") && peek(2).is_symbol("*")) {
      std::string q = expect_name("qualifier");
      advance();
      advance();
      return ast::make_star(q);
    }
    AstNode expr = parse_expr();
    std::optional<std::string> alias;
    if (accept_keyword("AS")) {
      if (peek().kind == TokenKind::string) {
        alias = advance().value;
      } else {
        alias = expect_name("alias");
      }
    } else if (at_name()) {
      alias = expect_name("alias");
    }
    if (!alias) return expr;
    AstNode node;
    node.kind = NodeKind::alias;
    node.name = *alias;
    node.children.push_back(std::move(expr));
    return node;
  }

  AstNode parse_source() {
    if (peek().is_symbol("(")) {
      if (!at_query_start(1)) unsupported("parenthesized join");
      advance();
      AstNode q = parse_query();
      expect_symbol(")");
      AstNode sub = ast::make_subquery(std::move(q));
      if (accept_keyword("AS")) {
        sub.alias = expect_name("alias");
      } else if (at_name()) {
        sub.alias = expect_name("alias");
      }
      return sub;
    }
    std::string name = expect_name("table name");
    if (peek().is_symbol(".")) unsupported("schema-qualified table name");
    if (peek().is_symbol("(")) unsupported("table-valued function");
    AstNode t = ast::make_table(name);
    if (accept_keyword("AS")) {
      t.alias = expect_name("alias");
    } else if (at_name() && !at_keyword("INDEXED")) {
      t.alias = expect_name("alias");
    }
    if (at_keyword("INDEXED") || (at_keyword("NOT") && at_keyword("INDEXED", 1))) unsupported("INDEXED BY");
    return t;
  }

  AstNode parse_from() {
    AstNode from = ast::make_clause(ClauseKind::from);
    from.children.push_back(parse_source());
    while (true) {
      ast::JoinKind kind;
      if (accept_symbol(",")) {
        kind = ast::JoinKind::comma;
      } else if (at_keyword("NATURAL")) {
        unsupported("NATURAL JOIN");
      } else if (at_keyword("RIGHT") || at_keyword("FULL")) {
        unsupported(to_upper(peek().text) + " JOIN");
      } else if (accept_keyword("LEFT")) {
        accept_keyword("OUTER");
        expect_keyword("JOIN");
        kind = ast::JoinKind::left;
      } else if (accept_keyword("INNER")) {
        expect_keyword("JOIN");
        kind = ast::JoinKind::inner;
      } else if (accept_keyword("CROSS")) {
        expect_keyword("JOIN");
        kind = ast::JoinKind::cross;
      } else if (accept_keyword("JOIN")) {
        kind = ast::JoinKind::inner;
      } else {
        break;
      }
      AstNode join;
      join.kind = NodeKind::join;
      join.join = kind;
      join.children.push_back(parse_source());
      if (at_keyword("USING")) unsupported("JOIN ... USING");
      if (accept_keyword("ON")) {
        if (kind == ast::JoinKind::comma) fail("ON after comma join");
        join.children.push_back(parse_expr());
      } else if (kind == ast::JoinKind::left) {
        fail("LEFT JOIN requires ON");
      }
      from.children.push_back(std::move(join));
    }
    return from;
  }

  AstNode parse_order_by() {
    expect_keyword("ORDER");
    expect_keyword("BY");
    AstNode clause = ast::make_clause(ClauseKind::order_by);
    do {
      clause.children.push_back(parse_sort_key());
    } while (accept_symbol(","));
    return clause;
  }

  AstNode parse_sort_key() {
    AstNode expr = parse_expr();
    if (at_keyword("COLLATE")) unsupported("COLLATE");
    ast::SortOrder order = ast::SortOrder::none;
    if (accept_keyword("ASC")) {
      order = ast::SortOrder::asc;
    } else if (accept_keyword("DESC")) {
      order = ast::SortOrder::desc;
    }
    if (at_keyword("NULLS")) unsupported("NULLS FIRST/LAST");
    return ast::make_sort_key(std::move(expr), order);
  }

  AstNode parse_limit() {
    expect_keyword("LIMIT");
    AstNode clause = ast::make_clause(ClauseKind::limit);
    AstNode first = parse_expr();
    if (accept_keyword("OFFSET")) {
      clause.children.push_back(std::move(first));
      clause.children.push_back(parse_expr());
    } else if (accept_symbol(",")) {
      // LIMIT offset, count
      AstNode count = parse_expr();
      clause.children.push_back(std::move(count));
      clause.children.push_back(std::move(first));
    } else {
      clause.children.push_back(std::move(first));
    }
    return clause;
  }

  // ---- expressions ---------------------------------------------------------

  AstNode parse_expr(int min_prec = kPrecOr) {
    AstNode left = parse_prefix();
    while (true) {
      const Token& t = peek();
      if (t.is_keyword("OR") || t.is_keyword("AND")) {
        int prec = t.is_keyword("OR") ? kPrecOr : kPrecAnd;
        if (prec < min_prec) break;
        auto c = t.is_keyword("OR") ? ast::Connective::or_ : ast::Connective::and_;
        advance();
        AstNode right = parse_expr(prec + 1);
        left = ast::make_logical(c, {std::move(left), std::move(right)});
        continue;
      }
      if (kPrecEquality < min_prec) {
        // Only tighter-binding operators may continue here.
        if (auto bin = binary_symbol(t); bin && bin->second >= min_prec) {
          advance();
          AstNode right = parse_expr(bin->second + 1);
          left = ast::make_op(bin->first, {std::move(left), std::move(right)});
          continue;
        }
        break;
      }
      bool negated = false;
      if (t.is_keyword("NOT") && (at_keyword("IN", 1) || at_keyword("LIKE", 1) || at_keyword("GLOB", 1) ||
                                  at_keyword("BETWEEN", 1) || at_keyword("NULL", 1) ||
                                  at_keyword("REGEXP", 1) || at_keyword("MATCH", 1))) {
        advance();
        negated = true;
      }
      const Token& k = peek();
      if (k.is_keyword("NULL") && negated) {
        advance();
        left = ast::make_op("IS NOT", {std::move(left), ast::make_null()});
        continue;
      }
      if (k.is_keyword("REGEXP") || k.is_keyword("MATCH")) unsupported(to_upper(k.text));
      if (k.is_keyword("ISNULL") || k.is_keyword("NOTNULL")) {
        bool is_not = k.is_keyword("NOTNULL");
        advance();
        left = ast::make_op(is_not ? "IS NOT" : "IS", {std::move(left), ast::make_null()});
        continue;
      }
      if (k.is_keyword("IS")) {
        advance();
        bool is_not = accept_keyword("NOT");
        if (at_keyword("DISTINCT")) unsupported("IS DISTINCT FROM");
        AstNode right = parse_expr(kPrecEquality + 1);
        left = ast::make_op(is_not ? "IS NOT" : "IS", {std::move(left), std::move(right)});
        continue;
      }
      if (k.is_keyword("IN")) {
        advance();
        left = parse_in_tail(std::move(left), negated);
        continue;
      }
      if (k.is_keyword("LIKE") || k.is_keyword("GLOB")) {
        std::string op = to_upper(k.text);
        advance();
        std::vector<AstNode> kids;
        kids.push_back(std::move(left));
        kids.push_back(parse_expr(kPrecEquality + 1));
        if (accept_keyword("ESCAPE")) kids.push_back(parse_expr(kPrecEquality + 1));
        left = ast::make_op(negated ? "NOT " + op : op, std::move(kids));
        continue;
      }
      if (k.is_keyword("BETWEEN")) {
        advance();
        AstNode lo = parse_expr(kPrecEquality + 1);
        expect_keyword("AND");
        AstNode hi = parse_expr(kPrecEquality + 1);
        left = ast::make_op(negated ? "NOT BETWEEN" : "BETWEEN", {std::move(left), std::move(lo), std::move(hi)});
        continue;
      }
      if (negated) fail("expected IN, LIKE, GLOB or BETWEEN after NOT");
      if (k.is_keyword("COLLATE")) unsupported("COLLATE");
      if (auto bin = binary_symbol(k); bin && bin->second >= min_prec) {
        advance();
        AstNode right = parse_expr(bin->second + 1);
        left = ast::make_op(bin->first, {std::move(left), std::move(right)});
        continue;
      }
      break;
    }
    return left;
  }

  static std::optional<std::pair<std::string, int>> binary_symbol(const Token& t) {
    if (t.kind != TokenKind::symbol) return std::nullopt;
    const std::string& s = t.text;
    if (s == "=" || s == "==") return std::pair<std::string, int>{"=", kPrecEquality};
    if (s == "!=" || s == "<>") return std::pair<std::string, int>{s, kPrecEquality};
    if (s == "<" || s == "<=" || s == ">" || s == ">=") return std::pair<std::string, int>{s, kPrecRelational};
    if (s == "<<" || s == ">>" || s == "&" || s == "|") return std::pair<std::string, int>{s, kPrecBitwise};
    if (s == "+" || s == "-") return std::pair<std::string, int>{s, kPrecAdditive};
    if (s == "*" || s == "/" || s == "%") return std::pair<std::string, int>{s, kPrecMultiplicative};
    if (s == "||") return std::pair<std::string, int>{s, kPrecConcat};
    return std::nullopt;
  }

  AstNode parse_in_tail(AstNode lhs, bool negated) {
    AstNode node = ast::make_op(negated ? "NOT IN" : "IN", {});
    node.children.push_back(std::move(lhs));
    if (!peek().is_symbol("(")) unsupported("IN <table>");
    advance();
    if (at_query_start()) {
      node.children.push_back(ast::make_subquery(parse_query()));
      expect_symbol(")");
      return node;
    }
    if (!accept_symbol(")")) {
      do {
        node.children.push_back(parse_expr());
      } while (accept_symbol(","));
      expect_symbol(")");
    }
    return node;
  }

  AstNode parse_prefix() {
    const Token& t = peek();
    if (t.is_keyword("NOT")) {
      advance();
      if (accept_keyword("EXISTS")) return parse_exists("NOT EXISTS");
      return ast::make_logical(ast::Connective::not_, {parse_expr(kPrecNot)});
    }
    if (t.is_symbol("-") || t.is_symbol("+") || t.is_symbol("~")) {
      std::string sym = t.text;
      advance();
      AstNode child = parse_expr(kPrecUnary);
      if (sym == "-" && child.kind == NodeKind::literal &&
          (child.literal == ast::LiteralKind::integer || child.literal == ast::LiteralKind::real) &&
          !child.name.starts_with("-")) {
        child.name = "-" + child.name;
        return child;
      }
      return ast::make_op(sym, {std::move(child)});
    }
    if (t.is_keyword("EXISTS")) {
      advance();
      return parse_exists("EXISTS");
    }
    if (t.is_keyword("CASE")) return parse_case();
    if (t.is_keyword("CAST")) return parse_cast();
    if (t.is_symbol("(")) {
      advance();
      if (at_query_start()) {
        AstNode sub = ast::make_subquery(parse_query());
        expect_symbol(")");
        return sub;
      }
      AstNode inner = parse_expr();
      if (peek().is_symbol(",")) unsupported("row value");
      expect_symbol(")");
      return inner;
    }
    switch (t.kind) {
      case TokenKind::integer:
      case TokenKind::real: {
        AstNode lit;
        lit.kind = NodeKind::literal;
        lit.literal = t.kind == TokenKind::integer ? ast::LiteralKind::integer : ast::LiteralKind::real;
        lit.name = t.text;
        advance();
        return lit;
      }
      case TokenKind::string: {
        AstNode lit = ast::make_string(t.value);
        advance();
        return lit;
      }
      case TokenKind::blob: {
        AstNode lit;
        lit.kind = NodeKind::literal;
        lit.literal = ast::LiteralKind::blob;
        lit.name = to_upper(t.value);
        advance();
        return lit;
      }
      default:
        break;
    }
    if (t.is_keyword("NULL")) {
      advance();
      return ast::make_null();
    }
    if (t.is_keyword("TRUE") || t.is_keyword("FALSE")) {
      AstNode lit;
      lit.kind = NodeKind::literal;
      lit.literal = ast::LiteralKind::boolean;
      lit.name = to_upper(t.text);
      advance();
      return lit;
    }
    if (t.is_keyword("CURRENT_DATE") || t.is_keyword("CURRENT_TIME") || t.is_keyword("CURRENT_TIMESTAMP")) {
      AstNode lit;
      lit.kind = NodeKind::literal;
      lit.literal = ast::LiteralKind::keyword;
      lit.name = to_upper(t.text);
      advance();
      return lit;
    }
    if (t.kind == TokenKind::identifier && peek(1).is_symbol("(") && !is_reserved_word(t.text)) {
      return parse_function();
    }
    if (at_name()) {
      std::string first = expect_name("column");
      if (accept_symbol(".")) {
        std::string second = expect_name("column");
        if (peek().is_symbol(".")) unsupported("schema-qualified column reference");
        return ast::make_column(first, second);
      }
      return ast::make_column({}, first);
    }
    if (t.kind == TokenKind::end) fail("expected expression, found end of input");
    if (t.kind == TokenKind::identifier) fail("unexpected keyword '" + t.text + "'");
    fail("expected expression, found '" + t.text + "'");
  }

  AstNode parse_exists(const char* symbol) {
    expect_symbol("(");
    if (!at_query_start()) fail("expected subquery after EXISTS");
    AstNode sub = ast::make_subquery(parse_query());
    expect_symbol(")");
    return ast::make_op(symbol, {std::move(sub)});
  }

  AstNode parse_case() {
    expect_keyword("CASE");
    AstNode node = ast::make_op("CASE", {});
    if (!at_keyword("WHEN")) {
      node.case_base = true;
      node.children.push_back(parse_expr());
    }
    if (!at_keyword("WHEN")) fail("expected WHEN");
    while (accept_keyword("WHEN")) {
      node.children.push_back(parse_expr());
      expect_keyword("THEN");
      node.children.push_back(parse_expr());
    }
    if (accept_keyword("ELSE")) {
      node.case_else = true;
      node.children.push_back(parse_expr());
    }
    expect_keyword("END");
    return node;
  }

  AstNode parse_cast() {
    expect_keyword("CAST");
    expect_symbol("(");
    AstNode node = ast::make_function("CAST", {parse_expr()});
    expect_keyword("AS");
    std::string type;
    int depth = 0;
    while (!(depth == 0 && peek().is_symbol(")"))) {
      const Token& t = peek();
      if (t.kind == TokenKind::end) fail("unterminated CAST");
      if (t.is_symbol("(")) ++depth;
      if (t.is_symbol(")")) --depth;
      bool glue = t.kind == TokenKind::symbol || type.empty() || type.back() == '(';
      if (!glue) type += ' ';
      type += to_upper(t.text);
      advance();
    }
    if (type.empty()) fail("expected type name");
    expect_symbol(")");
    node.type_name = type;
    return node;
  }

  AstNode parse_function() {
    AstNode fn;
    fn.kind = NodeKind::function;
    fn.name = to_upper(advance().text);
    expect_symbol("(");
    if (accept_symbol("*")) {
      fn.children.push_back(ast::make_star());
      expect_symbol(")");
    } else if (!accept_symbol(")")) {
      if (accept_keyword("DISTINCT")) fn.distinct = true;
      do {
        fn.children.push_back(parse_expr());
      } while (accept_symbol(","));
      if (at_keyword("ORDER")) unsupported("ordered aggregate arguments");
      expect_symbol(")");
    }
    if (at_keyword("FILTER")) unsupported("FILTER clause");
    if (accept_keyword("OVER")) {
      if (!peek().is_symbol("(")) unsupported("named window reference");
      advance();
      AstNode spec;
      spec.kind = NodeKind::window_spec;
      if (at_keyword("PARTITION")) {
        advance();
        expect_keyword("BY");
        AstNode part = ast::make_clause(ClauseKind::partition_by);
        do {
          part.children.push_back(parse_expr());
        } while (accept_symbol(","));
        spec.children.push_back(std::move(part));
      }
      if (at_keyword("ORDER")) spec.children.push_back(parse_order_by());
      if (at_keyword("ROWS") || at_keyword("RANGE") || at_keyword("GROUPS")) unsupported("window frame");
      expect_symbol(")");
      fn.children.push_back(std::move(spec));
    }
    return fn;
  }
};

}  // namespace

ast::SqlAst parse_sql(std::string_view text) {
  Parser p(text);
  ast::SqlAst out{p.parse_statement()};
  ast::validate(out);
  return out;
}

}  // namespace sqlforge
