#include "jessy/amcast.hpp"

namespace jessy {

std::string_view to_string(AmcastStage s) {
  switch (s) {
    case AmcastStage::kSubmit: return "SUBMIT";
    case AmcastStage::kPropose: return "PROPOSE";
    case AmcastStage::kAgree: return "AGREE";
    case AmcastStage::kAck: return "ACK";
  }
  return "?";
}

}  // namespace jessy
