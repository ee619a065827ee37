// Z4 as a model of the negative diagram of Z2, and the resulting mod-2 map.
#include <iostream>

#include "fmw/fmw.hpp"

int main() {
  using namespace fmw;
  const Workspace ws = parse_workspace(R"(
    signature Mag { fn m/2; }
    structure Z2 : Mag { universe 2; fn m = [0,1; 1,0]; }
    structure Z4 : Mag { universe 4; fn m = [0,1,2,3; 1,2,3,0; 2,3,0,1; 3,0,1,2]; }
  )");
  const FiniteStructure& z2 = ws.structure("Z2");
  const SigPtr ex = make_sig(expand_signature(z2.signature(), z2.size()));
  const FiniteStructure b = expand_structure(ws.structure("Z4"), ex, std::vector<Element>{0, 1});

  for (const auto& s : diagram(z2, ex).negative) std::cout << negated_to_string(s, *ex) << "\n";
  const auto q = quotient_from_negative_diagram(z2, b);
  for (std::size_t i = 0; i < q.sub.elements.size(); ++i)
    std::cout << q.sub.elements[i] << " = " << to_string(q.terms[i], *ex, {}) << " -> " << q.surjection.map[i] << "\n";
}
