#include <fstream>
#include <iostream>
#include <sstream>

#include "fmw/fmw.hpp"

namespace {

void show(const std::string& label, const std::optional<fmw::Refutation>& r) {
  std::cout << label << ": ";
  if (r)
    std::cout << "refuted by " << fmw::to_string(r->formula) << " at "
              << fmw::format_assignment(r->formula, r->falsifying) << "\n";
  else
    std::cout << "embedded\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fmw;
  const std::string path = argc > 1 ? argv[1] : "samples/workbench.fmw";
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot read " << path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();
  const Workspace ws = parse_workspace(text.str());

  show("P_edge in SP_R{S_sym}", malcev_witness(ws.structure("P_edge"), ws.catalog({"S_sym"})).refutation);
  show("Path3 in SP_R{P_edge}", malcev_witness(ws.structure("Path3"), ws.catalog({"P_edge"})).refutation);
  show("LeftProj in HSP{Z2}", birkhoff_witness(ws.structure("LeftProj"), ws.catalog({"Z2"})).refutation);
  show("Z2 in HSP{unit}", birkhoff_witness(ws.structure("Z2"), ws.catalog({"unit"})).refutation);
  show("Z2 in HSP{Z4}", birkhoff_witness(ws.structure("Z2"), ws.catalog({"Z4"})).refutation);

  const StrictnessReport s = strictness_audit(ws.catalog({"P_edge"}), {2, 0, 1});
  std::cout << "valid over {P_edge, unit}: " << s.valid_with_unit << ", non-strict " << s.non_strict_with_unit.size()
            << "\n";
  for (const auto& f : s.non_strict_without_unit) std::cout << "  without unit: " << to_string(f) << "\n";
}
