#pragma once

#include "errors.hpp"
#include "short_term_memory.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace agentmem {

enum class SkillCategory { manipulation, navigation };

struct SkillSpec {
    std::string name;
    std::vector<std::string> params;
    std::string doc;
    SkillCategory category;
};

class SkillRegistry {
public:
    void add(SkillSpec skill)
    {
        if (skill.name.empty()) throw ConfigError("skill name must be non-empty");
        if (find(skill.name)) throw ConfigError("skill '" + skill.name + "' is already registered");
        skills_.push_back(std::move(skill));
    }

    const SkillSpec* find(std::string_view name) const
    {
        auto it = std::find_if(skills_.begin(), skills_.end(), [&](const SkillSpec& s) { return s.name == name; });
        return it == skills_.end() ? nullptr : &*it;
    }

    const std::vector<SkillSpec>& skills() const noexcept { return skills_; }
    std::size_t size() const noexcept { return skills_.size(); }

private:
    std::vector<SkillSpec> skills_;
};

inline SkillRegistry default_skill_registry()
{
    using enum SkillCategory;
    SkillRegistry r;
    r.add({"GoToObject", {"robots", "dest_obj"}, "Navigate to an object whose location is known.", navigation});
    r.add({"PickupObject", {"robot", "pick_obj"}, "Pick up a visible object.", manipulation});
    r.add({"PutObject", {"robot", "put_obj", "recp"}, "Place the held object on or in a receptacle.", manipulation});
    r.add({"SwitchOn", {"robot", "sw_obj"}, "Turn a switch on.", manipulation});
    r.add({"SwitchOff", {"robot", "sw_obj"}, "Turn a switch off.", manipulation});
    r.add({"OpenObject", {"robot", "sw_obj"}, "Open a closed object the agent is next to.", manipulation});
    r.add({"CloseObject", {"robot", "sw_obj"}, "Close an open object the agent is next to.", manipulation});
    r.add({"BreakObject", {"robot", "sw_obj"}, "Break an object.", manipulation});
    r.add({"SliceObject", {"robot", "sw_obj"}, "Slice an object; requires holding a knife.", manipulation});
    r.add({"ThrowObject", {"robot", "sw_obj"}, "Throw away the held object.", manipulation});
    r.add({"Explore", {"robot", "sw_obj", "position"}, "Search the given locations until the object is visible.",
           navigation});
    r.add({"ToggleOn", {"robot", "sw_obj"}, "Toggle an appliance on.", manipulation});
    r.add({"ToggleOff", {"robot", "sw_obj"}, "Toggle an appliance off.", manipulation});
    return r;
}

/// Python-style stubs, one per registered skill, in registration order.
inline std::string render_skill_api(const SkillRegistry& registry)
{
    std::string out;
    for (const auto& s : registry.skills()) {
        out += "def " + s.name + "(";
        for (std::size_t i = 0; i < s.params.size(); ++i) {
            if (i) out += ", ";
            out += s.params[i];
        }
        out += "):\n    # " + s.doc + "\n    pass\n";
    }
    return out;
}

/// Free-text sections shipped as data files so they can be swapped without recompiling.
struct PromptTemplates {
    std::string role;
    std::string examples;
    std::string memory_note;
};

inline PromptTemplates load_prompt_templates(const std::filesystem::path& dir)
{
    auto slurp = [&](const char* name) {
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) throw ConfigError("missing prompt template " + (dir / name).string());
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string s = buf.str();
        while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
        return s;
    };
    return {slurp("role.txt"), slurp("examples.txt"), slurp("memory_note.txt")};
}

struct PromptBundle {
    std::string role_text;
    std::string skill_api_text;
    std::string examples_text;
    std::string memory_note_text;
    std::string instruction;
    std::vector<std::string> recalled_units;
    std::string scene_graph_text;
};

inline constexpr std::array<std::string_view, 7> kPromptSections{
    "## Role",        "## Skill API",        "## Task Decomposition Examples", "## Memory",
    "## Instruction", "## Short-Term Memory", "## Long-Term Memory",
};

inline constexpr std::string_view kNoShortTermMemory = "(no short-term memory recalled)";

/**
 * Fills a bundle from live inputs. At most `k` recalled units are kept, best first.
 * With k = 1 the prompt carries the single best unit; larger k carries the top-k list.
 */
inline PromptBundle make_bundle(const PromptTemplates& templates, const SkillRegistry& registry,
                                std::string instruction, const std::vector<RecallResult>& recalled,
                                std::size_t k, std::string scene_graph_text)
{
    PromptBundle b{templates.role, render_skill_api(registry), templates.examples, templates.memory_note,
                   std::move(instruction), {}, std::move(scene_graph_text)};
    for (std::size_t i = 0; i < recalled.size() && i < k; ++i) b.recalled_units.push_back(render_unit_text(recalled[i].unit));
    return b;
}

inline std::string build_prompt(const PromptBundle& b)
{
    if (b.instruction.empty()) throw ConfigError("prompt instruction must be non-empty");
    auto section = [](std::string& out, std::string_view header, std::string_view body) {
        out += header;
        out += '\n';
        out += body;
        if (body.empty() || body.back() != '\n') out += '\n';
        out += '\n';
    };
    std::string out;
    section(out, kPromptSections[0], b.role_text);
    section(out, kPromptSections[1], b.skill_api_text);
    section(out, kPromptSections[2], b.examples_text);
    section(out, kPromptSections[3], b.memory_note_text);
    section(out, kPromptSections[4], b.instruction);
    std::string recalled;
    if (b.recalled_units.empty()) {
        recalled = kNoShortTermMemory;
    } else {
        for (std::size_t i = 0; i < b.recalled_units.size(); ++i)
            recalled += std::to_string(i + 1) + ". " + b.recalled_units[i] + "\n";
    }
    section(out, kPromptSections[5], recalled);
    section(out, kPromptSections[6], b.scene_graph_text);
    return out;
}

/// Four-step state-inference prompt for a vision-language model. "[Image]" stays a placeholder.
inline std::string vlm_state_prompt(std::string_view task)
{
    if (task.empty()) throw ConfigError("vlm prompt task must be non-empty");
    std::string t(task);
    return "<System Role> You read household scenes from a single image and report the condition of the objects "
           "a task refers to.\n"
           "<User Role>\n"
           "1. Describe everything visible in [Image].\n"
           "2. The task is: " + t + ". Keep only the parts of your description that concern objects named in the task.\n"
           "3. Give each of those objects exactly one state from this list: heated, cooked, sliced, cleaned, dirty, "
           "filled, used up, off, on, opened, closed, none.\n"
           "4. Answer with one line per object, formatted as object: state.\n";
}

} // namespace agentmem
