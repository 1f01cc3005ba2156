#include <cctype>
#include <map>
#include <optional>

#include "gfobf/simulate.hpp"

namespace gfobf {

namespace {

struct Token {
  enum class Kind { ident, number, literal, punct, end };
  Kind kind = Kind::end;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw VerilogParseError(tok_.line, tok_.col, msg);
  }

 private:
  void advance() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() &&
                 text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_.kind = Token::Kind::end;
      return;
    }
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '$'))
        consume();
      tok_.kind = Token::Kind::ident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        consume();
      if (pos_ < text_.size() && text_[pos_] == '\'') {
        consume();
        while (pos_ < text_.size() &&
               std::isalnum(static_cast<unsigned char>(text_[pos_])))
          consume();
        tok_.kind = Token::Kind::literal;
      } else {
        tok_.kind = Token::Kind::number;
      }
    } else {
      consume();
      tok_.kind = Token::Kind::punct;
    }
  }
  void consume() {
    tok_.text += text_[pos_++];
    ++col_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

struct Operand {
  bool negate = false;
  std::string name;  // "A[3]", "n17", or literal "1'b0"
};

struct Assign {
  std::optional<char> op;  // '&' '|' '^'; empty for a copy
  Operand lhs_ref0, lhs_ref1;
  int line = 1, col = 1;
};

class Reader {
 public:
  explicit Reader(const std::string& text) : lex_(text) {}

  Netlist run() {
    expect_ident("module");
    expect_kind(Token::Kind::ident, "module name");
    expect_punct("(");
    while (lex_.peek().kind == Token::Kind::ident) {
      lex_.take();
      if (lex_.peek().text == ",")
        lex_.take();
      else
        break;
    }
    expect_punct(")");
    expect_punct(";");

    while (true) {
      const Token t = lex_.peek();
      if (t.kind != Token::Kind::ident) lex_.fail("expected declaration");
      if (t.text == "endmodule") break;
      if (t.text == "input" || t.text == "output")
        read_port_decl(t.text == "output");
      else if (t.text == "wire")
        read_wire_decl();
      else if (t.text == "assign")
        read_assign();
      else
        lex_.fail("unsupported construct '" + t.text + "'");
    }
    lex_.take();  // endmodule
    return build();
  }

 private:
  void expect_ident(const std::string& what) {
    const Token t = lex_.take();
    if (t.kind != Token::Kind::ident || t.text != what)
      throw VerilogParseError(t.line, t.col, "expected '" + what + "'");
  }
  void expect_punct(const std::string& what) {
    const Token t = lex_.take();
    if (t.kind != Token::Kind::punct || t.text != what)
      throw VerilogParseError(t.line, t.col, "expected '" + what + "'");
  }
  Token expect_kind(Token::Kind kind, const std::string& what) {
    const Token t = lex_.take();
    if (t.kind != kind)
      throw VerilogParseError(t.line, t.col, "expected " + what);
    return t;
  }

  unsigned read_range() {  // "[msb:0]" -> msb + 1
    expect_punct("[");
    const Token msb = expect_kind(Token::Kind::number, "range bound");
    expect_punct(":");
    const Token lsb = expect_kind(Token::Kind::number, "range bound");
    if (lsb.text != "0")
      throw VerilogParseError(lsb.line, lsb.col, "ranges must end at 0");
    expect_punct("]");
    return static_cast<unsigned>(std::stoul(msb.text)) + 1;
  }

  void read_port_decl(bool is_output) {
    lex_.take();  // input / output
    unsigned width = 1;
    if (lex_.peek().text == "[") width = read_range();
    const Token name = expect_kind(Token::Kind::ident, "port name");
    expect_punct(";");
    if (is_output) {
      if (name.text != "Z")
        throw VerilogParseError(name.line, name.col,
                                "unsupported output port '" + name.text + "'");
      z_width_ = width;
    } else if (name.text == "A") {
      width_a_ = width;
    } else if (name.text == "B") {
      width_b_ = width;
    } else if (name.text == "P") {
      key_bits_ = width;
    } else {
      throw VerilogParseError(name.line, name.col,
                              "unsupported input port '" + name.text + "'");
    }
  }

  void read_wire_decl() {
    lex_.take();  // wire
    while (true) {
      expect_kind(Token::Kind::ident, "wire name");
      const Token t = lex_.take();
      if (t.text == ";") break;
      if (t.text != ",")
        throw VerilogParseError(t.line, t.col, "expected ',' or ';'");
    }
  }

  Operand read_operand() {
    Operand op;
    if (lex_.peek().text == "~") {
      lex_.take();
      op.negate = true;
    }
    const Token t = lex_.take();
    if (t.kind == Token::Kind::literal) {
      if (t.text != "1'b0" && t.text != "1'b1")
        throw VerilogParseError(t.line, t.col,
                                "unsupported literal '" + t.text + "'");
      op.name = t.text;
      return op;
    }
    if (t.kind != Token::Kind::ident)
      throw VerilogParseError(t.line, t.col, "expected operand");
    op.name = t.text;
    if (lex_.peek().text == "[") {
      lex_.take();
      const Token idx = expect_kind(Token::Kind::number, "bit index");
      expect_punct("]");
      op.name += "[" + idx.text + "]";
    }
    return op;
  }

  void read_assign() {
    const Token kw = lex_.take();  // assign
    Operand lhs = read_operand();
    if (lhs.negate)
      throw VerilogParseError(kw.line, kw.col, "negated assign target");
    expect_punct("=");
    Assign a;
    a.line = kw.line;
    a.col = kw.col;
    a.lhs_ref0 = read_operand();
    const Token t = lex_.take();
    if (t.text == "&" || t.text == "|" || t.text == "^") {
      a.op = t.text[0];
      a.lhs_ref1 = read_operand();
      expect_punct(";");
    } else if (t.text != ";") {
      throw VerilogParseError(t.line, t.col, "expected operator or ';'");
    }
    if (!assigns_.emplace(lhs.name, a).second)
      throw VerilogParseError(kw.line, kw.col,
                              "net '" + lhs.name + "' assigned twice");
  }

  std::uint32_t resolve(const std::string& name, int line, int col) {
    if (auto it = nodes_.find(name); it != nodes_.end()) {
      if (it->second == kInProgress)
        throw VerilogParseError(line, col,
                                "combinational cycle through '" + name + "'");
      return it->second;
    }
    if (name == "1'b0") return nodes_[name] = nb_.constant(false);
    if (name == "1'b1") return nodes_[name] = nb_.constant(true);
    if (name.size() > 2 && name[1] == '[') {
      const unsigned bit =
          static_cast<unsigned>(std::stoul(name.substr(2)));
      if (name[0] == 'A' && bit < width_a_)
        return nodes_[name] = nb_.input_a(bit);
      if (name[0] == 'B' && bit < width_b_)
        return nodes_[name] = nb_.input_b(bit);
      if (name[0] == 'P' && bit < key_bits_)
        return nodes_[name] = nb_.key(bit);
    }
    const auto it = assigns_.find(name);
    if (it == assigns_.end())
      throw VerilogParseError(line, col, "net '" + name + "' never assigned");
    const Assign& a = it->second;
    nodes_[name] = kInProgress;
    const std::uint32_t x = operand_node(a.lhs_ref0, a.line, a.col);
    std::uint32_t node = x;
    if (a.op) {
      const std::uint32_t y = operand_node(a.lhs_ref1, a.line, a.col);
      const GateKind kind = *a.op == '&'   ? GateKind::and_gate
                            : *a.op == '|' ? GateKind::or_gate
                                           : GateKind::xor_gate;
      node = nb_.gate(kind, x, y);
    }
    return nodes_[name] = node;
  }

  std::uint32_t operand_node(const Operand& op, int line, int col) {
    std::uint32_t node = resolve(op.name, line, col);
    if (op.negate) node = nb_.gate(GateKind::not_gate, node);
    return node;
  }

  Netlist build() {
    std::vector<std::uint32_t> outputs;
    for (unsigned q = 0; q < z_width_; ++q) {
      const std::string name = "Z[" + std::to_string(q) + "]";
      const auto it = assigns_.find(name);
      if (it == assigns_.end())
        throw VerilogParseError(1, 1, "output '" + name + "' never assigned");
      const Assign& a = it->second;
      nodes_[name] = kInProgress;
      std::uint32_t node = operand_node(a.lhs_ref0, a.line, a.col);
      if (a.op) {
        const GateKind kind = *a.op == '&'   ? GateKind::and_gate
                              : *a.op == '|' ? GateKind::or_gate
                                             : GateKind::xor_gate;
        node = nb_.gate(kind, node, operand_node(a.lhs_ref1, a.line, a.col));
      }
      nodes_[name] = node;
      outputs.push_back(node);
    }
    nb_.set_outputs(std::move(outputs));
    return nb_.build(width_a_, width_b_, key_bits_);
  }

  static constexpr std::uint32_t kInProgress = 0xffffffff;
  Lexer lex_;
  NetlistBuilder nb_;
  std::map<std::string, Assign> assigns_;
  std::map<std::string, std::uint32_t> nodes_;
  unsigned width_a_ = 0, width_b_ = 0, key_bits_ = 0, z_width_ = 0;
};

}  // namespace

Netlist read_verilog_subset(const std::string& text) {
  return Reader(text).run();
}

}  // namespace gfobf
