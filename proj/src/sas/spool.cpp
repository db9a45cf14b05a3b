#include "sas/spool.hpp"

#include <algorithm>

#include "core/error.hpp"
#include "store/files.hpp"

namespace agentest::sas {

std::filesystem::path spool_result(const std::filesystem::path& dir, const std::string& session_id,
                                   const Value& result)
{
    std::string file = session_id;
    std::replace(file.begin(), file.end(), ':', '_');
    auto path = dir / (file + ".json");
    Value doc = Value::map();
    doc["session_id"] = session_id;
    doc["result"] = result;
    store::write_file_atomic(path, to_json(doc).dump(2) + "\n");
    return path;
}

std::vector<SpooledResult> read_spool(const std::filesystem::path& dir)
{
    std::vector<SpooledResult> out;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        return out;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir, ec))
        if (e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto text = store::read_file(f);
        if (!text)
            continue;
        try {
            Value doc = from_json(nlohmann::json::parse(*text));
            out.push_back({doc.get_string("session_id"), doc.find("result") ? *doc.find("result") : Value{}});
        } catch (const std::exception&) {
            // half-written leftovers of a crash are skipped
        }
    }
    return out;
}

} // namespace agentest::sas
