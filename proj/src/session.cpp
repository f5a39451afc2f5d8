#include "uelicit/session.hpp"

#include <cstdio>
#include <fstream>

#include "uelicit/error.hpp"

namespace uelicit {

TreeProvider::TreeProvider(std::shared_ptr<const DecisionModel> model, std::shared_ptr<const UtilityDatabase> db,
                           std::size_t k, double min_gap)
    : model_(std::move(model))
    , db_(std::move(db))
    , k_(k)
    , min_gap_(min_gap)
{
    if (!model_ || !db_) throw ValidationError("tree provider needs a model and a database");
    if (db_->empty()) throw ValidationError("tree provider needs a non-empty database");
    model_->check_dimension(db_->outcome_count());
    if (k_ < 1) throw ValidationError("k must be at least 1");
}

std::shared_ptr<const Clustering> TreeProvider::clustering(HistoryId h)
{
    model_->check_history(h);
    return clusterings_.get(*db_, *model_, h, k_);
}

std::shared_ptr<const ElicitationTree> TreeProvider::tree(HistoryId h)
{
    model_->check_history(h);
    {
        std::lock_guard lock(mutex_);
        if (auto it = trees_.find(h); it != trees_.end()) return it->second;
    }
    const auto clusters = clustering(h);
    TreeMetadata meta;
    meta.db_hash = db_->fingerprint();
    meta.k = k_;
    auto built = std::make_shared<const ElicitationTree>(
        build_tree(TrainingSet::from(*db_, *clusters), *model_, h, min_gap_, meta));
    std::lock_guard lock(mutex_);
    return trees_.try_emplace(h, std::move(built)).first->second;
}

void TreeProvider::warm_up()
{
    for (HistoryId h = 0; h < model_->history_count(); ++h) tree(h);
}

std::size_t TreeProvider::built() const
{
    std::lock_guard lock(mutex_);
    return trees_.size();
}

std::string to_string(SessionStatus status)
{
    return status == SessionStatus::complete ? "COMPLETE" : "IN_PROGRESS";
}

SessionStore::SessionStore(std::shared_ptr<TreeProvider> trees, std::uint64_t seed)
    : trees_(std::move(trees))
    , rng_(seed)
{
    if (!trees_) throw ValidationError("session store needs a tree provider");
}

std::string SessionStore::next_id()
{
    std::lock_guard lock(rng_mutex_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_()));
    return buf;
}

void SessionStore::settle(Entry& entry) const
{
    const auto& node = entry.tree->node(entry.session.node);
    const auto* leaf = std::get_if<LeafNode>(&node);
    if (leaf == nullptr) return;

    const auto& db = trees_->db();
    const auto& proto = db.at(db.index_of(leaf->prototype));
    const auto best = best_strategy(trees_->model(), proto.values, entry.session.history);
    entry.session.status = SessionStatus::complete;
    entry.session.result = SessionResult{leaf->label, proto.id, proto.values, best.strategy, best.expected_utility};
}

std::shared_ptr<SessionStore::Entry> SessionStore::open(HistoryId h, std::string id)
{
    auto entry = std::make_shared<Entry>();
    entry->tree = trees_->tree(h);
    entry->session.id = std::move(id);
    entry->session.history = h;
    entry->session.node = entry->tree->root();
    settle(*entry);
    return entry;
}

Session SessionStore::create(HistoryId h)
{
    trees_->model().check_history(h);
    auto entry = open(h, next_id());
    Session copy = entry->session;
    std::unique_lock lock(mutex_);
    while (!sessions_.try_emplace(entry->session.id, entry).second) entry->session.id = copy.id = next_id();
    return copy;
}

Session SessionStore::create(std::string_view history_selector)
{
    return create(trees_->model().find_history(history_selector));
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
    return it->second;
}

Session SessionStore::get(const std::string& id) const
{
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return entry->session;
}

QuestionView SessionStore::question(const std::string& id) const
{
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    const auto& s = entry->session;
    if (s.status == SessionStatus::complete) throw StateError("session '" + id + "' is complete");

    const auto& split = std::get<SplitNode>(entry->tree->node(s.node));
    const auto& outcomes = trees_->model().outcomes();
    QuestionView view;
    view.session_id = s.id;
    view.node = s.node;
    view.question = split.question;
    view.text = split.text;
    view.outcome_labels.push_back(outcomes.at(split.question.first).label);
    if (split.question.kind == SplitKind::preference) view.outcome_labels.push_back(outcomes.at(split.question.second).label);
    view.answered = s.transcript.size();
    view.max_depth = entry->tree->depth();
    return view;
}

Session SessionStore::submit(const std::string& id, bool answer)
{
    auto entry = find(id);
    std::unique_lock lock(entry->mutex, std::try_to_lock);
    if (!lock.owns_lock()) throw ConflictError("session '" + id + "' is already processing an answer");
    auto& s = entry->session;
    if (s.status == SessionStatus::complete) throw StateError("session '" + id + "' is already complete");

    const auto& split = std::get<SplitNode>(entry->tree->node(s.node));
    s.transcript.push_back({s.node, split.question, answer});
    s.node = answer ? split.yes : split.no;
    settle(*entry);
    return s;
}

Session SessionStore::replay(HistoryId h, const std::vector<bool>& answers)
{
    const Session created = create(h);
    Session current = created;
    for (bool a : answers) {
        if (current.status == SessionStatus::complete) throw StateError("transcript is longer than the path to a leaf");
        current = submit(created.id, a);
    }
    return current;
}

std::size_t SessionStore::size() const
{
    std::shared_lock lock(mutex_);
    return sessions_.size();
}

nlohmann::json SessionStore::snapshot() const
{
    std::shared_lock lock(mutex_);
    nlohmann::json sessions = nlohmann::json::array();
    for (const auto& [id, entry] : sessions_) {
        std::lock_guard entry_lock(entry->mutex);
        std::vector<bool> answers;
        for (const auto& t : entry->session.transcript) answers.push_back(t.answer);
        sessions.push_back({{"id", id}, {"history", std::to_string(entry->session.history)}, {"answers", answers}});
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(trees_->db().fingerprint()));
    return {{"db_hash", hash}, {"k", trees_->k()}, {"gamma", trees_->min_gap()}, {"sessions", std::move(sessions)}};
}

void SessionStore::restore(const nlohmann::json& snapshot)
{
    try {
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(trees_->db().fingerprint()));
        if (snapshot.at("db_hash").get<std::string>() != hash || snapshot.at("k").get<std::size_t>() != trees_->k() ||
            snapshot.at("gamma").get<double>() != trees_->min_gap())
            throw StateError("snapshot was taken against a different database or tree settings");

        std::map<std::string, std::shared_ptr<Entry>> restored;
        for (const auto& item : snapshot.at("sessions")) {
            const auto id = item.at("id").get<std::string>();
            const auto h = trees_->model().find_history(item.at("history").get<std::string>());
            auto entry = open(h, id);
            for (bool a : item.at("answers").get<std::vector<bool>>()) {
                if (entry->session.status == SessionStatus::complete)
                    throw StateError("snapshot transcript for '" + id + "' runs past a leaf");
                const auto& split = std::get<SplitNode>(entry->tree->node(entry->session.node));
                entry->session.transcript.push_back({entry->session.node, split.question, a});
                entry->session.node = a ? split.yes : split.no;
                settle(*entry);
            }
            restored.emplace(id, std::move(entry));
        }
        std::unique_lock lock(mutex_);
        sessions_ = std::move(restored);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("session snapshot: ") + e.what());
    }
}

void SessionStore::save_snapshot(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write session snapshot " + path.string());
    out << snapshot().dump(2) << '\n';
}

void SessionStore::load_snapshot(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open session snapshot " + path.string());
    try {
        restore(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

nlohmann::json session_to_json(const Session& session, const DecisionModel& model)
{
    nlohmann::json transcript = nlohmann::json::array();
    for (const auto& t : session.transcript)
        transcript.push_back({{"question", split_to_json(t.question, question_text(t.question, model))}, {"answer", t.answer}});

    nlohmann::json doc{{"id", session.id},
                       {"history_id", std::to_string(session.history)},
                       {"history_label", model.histories().at(session.history).label},
                       {"status", to_string(session.status)},
                       {"node", session.node},
                       {"questions_answered", session.transcript.size()},
                       {"transcript", std::move(transcript)},
                       {"result", nullptr}};
    if (session.result) {
        const auto& r = *session.result;
        const auto& strategy = model.strategies().at(r.strategy);
        doc["result"] = {{"cluster_label", r.label},
                         {"prototype_id", r.prototype_id},
                         {"prototype_utilities", r.prototype_values},
                         {"strategy_id", std::to_string(r.strategy)},
                         {"strategy_label", strategy.label},
                         {"strategy_description", strategy.description},
                         {"expected_utility", r.expected_utility}};
    }
    return doc;
}

nlohmann::json question_to_json(const QuestionView& view)
{
    nlohmann::json doc{{"session_id", view.session_id},
                       {"node", view.node},
                       {"kind", view.question.kind == SplitKind::preference ? "preference" : "feature"},
                       {"text", view.text},
                       {"outcome_ids", nlohmann::json::array()},
                       {"outcome_labels", view.outcome_labels},
                       {"questions_answered", view.answered},
                       {"max_questions", view.max_depth}};
    doc["outcome_ids"].push_back(std::to_string(view.question.first));
    if (view.question.kind == SplitKind::preference) {
        doc["outcome_ids"].push_back(std::to_string(view.question.second));
    } else {
        doc["lottery"] = {{"best_probability", view.question.threshold},
                          {"worst_probability", 1.0 - view.question.threshold}};
    }
    return doc;
}

nlohmann::json model_summary_json(const DecisionModel& model)
{
    nlohmann::json outcomes = nlohmann::json::array(), histories = nlohmann::json::array(),
                   strategies = nlohmann::json::array();
    for (const auto& o : model.outcomes())
        outcomes.push_back({{"id", std::to_string(o.id)}, {"label", o.label}, {"question_text", o.question_text}});
    for (const auto& h : model.histories())
        histories.push_back({{"id", std::to_string(h.id)}, {"label", h.label}, {"prior", h.prior}});
    for (const auto& s : model.strategies())
        strategies.push_back({{"id", std::to_string(s.id)}, {"label", s.label}, {"description", s.description}});
    return {{"outcomes", std::move(outcomes)},
            {"histories", std::move(histories)},
            {"strategies", std::move(strategies)},
            {"best_anchor", std::to_string(model.best_anchor())},
            {"worst_anchor", std::to_string(model.worst_anchor())}};
}

} // namespace uelicit
