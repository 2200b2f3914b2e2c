#include "nsnn/network_io.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nsnn/error.hpp"

namespace nsnn {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
    {
        bool ok = false;
        for (auto a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw ParseError(path, "unknown field '" + it.key() + "'");
    }
}

const json& member(const json& obj, const std::string& path, const char* key)
{
    if (!obj.is_object())
        throw ParseError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError(path, std::string("missing field '") + key + "'");
    return *it;
}

const json& array_member(const json& obj, const std::string& path, const char* key)
{
    const json& v = member(obj, path, key);
    if (!v.is_array())
        throw ParseError(path + "." + key, "expected an array");
    return v;
}

double number(const json& v, const std::string& path)
{
    if (!v.is_number())
        throw ParseError(path, "expected a number");
    return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& path)
{
    if (!v.is_number_integer())
        throw ParseError(path, "expected an integer");
    return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& path)
{
    if (!v.is_string())
        throw ParseError(path, "expected a string");
    return v.get<std::string>();
}

std::string index_path(const char* array, std::size_t i)
{
    return std::string(array) + "[" + std::to_string(i) + "]";
}

std::string line_column(std::string_view input, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < input.size(); ++i)
    {
        if (input[i] == '\n')
        {
            ++line;
            col = 1;
        }
        else
        {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

std::string serialize_network(const NetworkGraph& graph)
{
    json doc;
    doc["version"] = network_file_version;
    doc["neuron_kind"] = std::string(to_string(graph.kind));
    doc["params"] = {{"T_cycles", graph.params.T_cycles}, {"sigma_a", graph.params.sigma_a}};

    json neurons = json::array();
    for (const auto& n : graph.neurons)
        neurons.push_back({{"id", n.id}, {"threshold", n.threshold}});
    doc["neurons"] = std::move(neurons);

    json synapses = json::array();
    for (const auto& s : graph.synapses)
    {
        json pre = s.from_input ? json(graph.inputs.at(static_cast<std::size_t>(s.pre))) : json(s.pre);
        synapses.push_back({{"pre", std::move(pre)}, {"post", s.post}, {"weight", s.weight}, {"delay", s.delay}});
    }
    doc["synapses"] = std::move(synapses);
    doc["inputs"] = graph.inputs;

    json outputs = json::array();
    for (const auto& o : graph.outputs)
        outputs.push_back({{"name", o.name}, {"neuron", o.neuron}});
    doc["outputs"] = std::move(outputs);

    return doc.dump(1, '\t') + "\n";
}

NetworkGraph deserialize_network(std::string_view input, bool require_connected)
{
    json doc;
    try
    {
        doc = json::parse(input.begin(), input.end(), nullptr, true, true);
    }
    catch (const json::parse_error& e)
    {
        throw ParseError(line_column(input, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
    }
    if (!doc.is_object())
        throw ParseError("", "network document must be a JSON object");
    reject_unknown(doc, "", {"version", "neurons", "synapses", "inputs", "outputs", "neuron_kind", "params"});

    if (integer(member(doc, "", "version"), "version") != network_file_version)
        throw ParseError("version", "unsupported version (expected " + std::to_string(network_file_version) + ")");

    NetworkGraph g;
    try
    {
        g.kind = parse_neuron_kind(text(member(doc, "", "neuron_kind"), "neuron_kind"));
    }
    catch (const InvalidInput& e)
    {
        throw ParseError("neuron_kind", e.what());
    }

    const json& params = member(doc, "", "params");
    reject_unknown(params, "params", {"T_cycles", "sigma_a"});
    g.params.T_cycles = number(member(params, "params", "T_cycles"), "params.T_cycles");
    g.params.sigma_a = number(member(params, "params", "sigma_a"), "params.sigma_a");

    const json& inputs = array_member(doc, "", "inputs");
    for (std::size_t i = 0; i < inputs.size(); ++i)
        g.inputs.push_back(text(inputs[i], index_path("inputs", i)));

    const json& neurons = array_member(doc, "", "neurons");
    for (std::size_t i = 0; i < neurons.size(); ++i)
    {
        const auto path = index_path("neurons", i);
        reject_unknown(neurons[i], path, {"id", "threshold"});
        g.neurons.push_back({integer(member(neurons[i], path, "id"), path + ".id"),
                             number(member(neurons[i], path, "threshold"), path + ".threshold")});
    }

    const json& synapses = array_member(doc, "", "synapses");
    for (std::size_t i = 0; i < synapses.size(); ++i)
    {
        const auto path = index_path("synapses", i);
        const json& s = synapses[i];
        reject_unknown(s, path, {"pre", "post", "weight", "delay"});
        Synapse syn;
        const json& pre = member(s, path, "pre");
        if (pre.is_string())
        {
            const auto name = pre.get<std::string>();
            std::size_t k = 0;
            while (k < g.inputs.size() && g.inputs[k] != name)
                ++k;
            if (k == g.inputs.size())
                throw ValidationError(path + ": dangling pre endpoint, unknown input port '" + name + "'");
            syn.from_input = true;
            syn.pre = static_cast<std::int64_t>(k);
        }
        else
        {
            syn.pre = integer(pre, path + ".pre");
        }
        syn.post = integer(member(s, path, "post"), path + ".post");
        syn.weight = number(member(s, path, "weight"), path + ".weight");
        const auto delay = integer(member(s, path, "delay"), path + ".delay");
        if (delay < 1)
            throw ValidationError(path + ": delay must be at least 1 cycle");
        if (delay > std::numeric_limits<std::uint32_t>::max())
            throw ValidationError(path + ": delay out of range");
        syn.delay = static_cast<std::uint32_t>(delay);
        g.synapses.push_back(syn);
    }

    const json& outputs = array_member(doc, "", "outputs");
    for (std::size_t i = 0; i < outputs.size(); ++i)
    {
        const auto path = index_path("outputs", i);
        reject_unknown(outputs[i], path, {"name", "neuron"});
        g.outputs.push_back({text(member(outputs[i], path, "name"), path + ".name"),
                             integer(member(outputs[i], path, "neuron"), path + ".neuron")});
    }

    if (require_connected)
        g.validate_connected();
    else
        g.validate();
    return g;
}

NetworkGraph load_network(const std::filesystem::path& path, bool require_connected)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open network file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try
    {
        return deserialize_network(buf.str(), require_connected);
    }
    catch (const ParseError& e)
    {
        throw ParseError(path.string() + (e.where().empty() ? "" : ": " + e.where()),
                         std::string(e.what()).substr(e.where().empty() ? 0 : e.where().size() + 2));
    }
}

void save_network(const NetworkGraph& graph, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write network file " + path.string());
    out << serialize_network(graph);
    if (!out)
        throw Error("failed writing network file " + path.string());
}

} // namespace nsnn
