#include <doctest.h>

#include "core/error.hpp"
#include "eval/engine.hpp"

using namespace agentest;
using namespace agentest::eval;

namespace {

Question choice(std::string id, QuestionType type, int difficulty, std::vector<std::string> options)
{
    Question q;
    q.id = std::move(id);
    q.text = "pick";
    q.type = type;
    q.difficulty = difficulty;
    for (auto& o : options)
        q.options.push_back({o, o});
    return q;
}

Question plain(std::string id, QuestionType type, int difficulty, Rational weight = Rational(1))
{
    Question q;
    q.id = std::move(id);
    q.text = "say";
    q.type = type;
    q.difficulty = difficulty;
    q.weight = weight;
    return q;
}

struct Fixture {
    QuestionBank bank;
    Test test;

    void add(Question q, ExpertAnswer a)
    {
        a.question_id = q.id;
        test.question_ids.push_back(q.id);
        bank.answers[q.id] = std::move(a);
        bank.questions[q.id] = std::move(q);
    }
    EvaluationEngine engine(int max = 0, PolicyOverrides o = {})
    {
        test.id = "t";
        test.max_questions = max ? max : static_cast<int>(test.question_ids.size());
        return compile_engine(test, bank, o, "eng");
    }
};

ExpertAnswer numeric(double v, double tol)
{
    ExpertAnswer a;
    a.value = v;
    a.tolerance = tol;
    return a;
}

ExpertAnswer phrases(std::vector<std::string> p)
{
    ExpertAnswer a;
    a.phrases = std::move(p);
    return a;
}

Value list(std::initializer_list<const char*> xs)
{
    Value l = Value::list();
    for (auto x : xs)
        l.push_back(x);
    return l;
}

} // namespace

TEST_SUITE("eval")
{
    TEST_CASE("short answer normalization")
    {
        CHECK(normalize_short_answer("").empty());
        CHECK(normalize_short_answer("The LAW of Newton.") == TokenSet{"law", "newton"});
        CHECK(normalize_short_answer("Newton's Second Law") == TokenSet{"newton", "second", "law"});
        for (const char* s : {"Hello,  World!", "a-b_c d", "ÜBER über", "  x\ty\nz  "}) {
            auto once = normalize_short_answer(s);
            std::string joined;
            for (const auto& t : once)
                joined += t + " ";
            CHECK(normalize_short_answer(joined) == once);
        }
    }

    TEST_CASE("per-type scoring")
    {
        Fixture f;
        ExpertAnswer single;
        single.option = "b";
        f.add(choice("s", QuestionType::single_choice, 3, {"a", "b"}), single);
        ExpertAnswer multi;
        multi.options = {"A", "C"};
        f.add(choice("m", QuestionType::multi_choice, 3, {"A", "B", "C"}), multi);
        f.add(plain("n", QuestionType::numeric, 3), numeric(9.81, 0.05));
        f.add(plain("w", QuestionType::short_answer, 3), phrases({"Newton's Second Law"}));
        auto e = f.engine();

        CHECK(evaluate_answer(e, "s", "b") == Rational(1));
        CHECK(evaluate_answer(e, "s", "a") == Rational(0));
        CHECK(evaluate_answer(e, "m", list({"A", "B"})) == Rational(0));
        CHECK(evaluate_answer(e, "m", list({"A"})) == Rational(1, 2));
        CHECK(evaluate_answer(e, "m", list({"A", "C"})) == Rational(1));
        CHECK(evaluate_answer(e, "n", 9.8) == Rational(1));
        CHECK(evaluate_answer(e, "n", "9.85") == Rational(1));
        CHECK(evaluate_answer(e, "n", 10) == Rational(0));
        CHECK(evaluate_answer(e, "w", "second law") == Rational(2, 3));
        CHECK(evaluate_answer(e, "w", "the second law of Newton") == Rational(1));

        CHECK_THROWS_AS(evaluate_answer(e, "zz", "a"), Error);
        CHECK_THROWS_AS(evaluate_answer(e, "m", "A"), Error);
        CHECK_THROWS_AS(evaluate_answer(e, "n", "lots"), Error);
    }

    TEST_CASE("compile errors name the question")
    {
        Fixture f;
        f.add(plain("n", QuestionType::numeric, 3), numeric(1, 0));
        f.test.question_ids.push_back("ghost");
        f.bank.questions["ghost"] = plain("ghost", QuestionType::numeric, 2);
        try {
            f.engine(1);
            FAIL("expected missing_answer");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::missing_answer);
            CHECK(e.detail().find("ghost") != std::string::npos);
        }
        Fixture g;
        ExpertAnswer bad;
        bad.option = "z";
        g.add(choice("c", QuestionType::single_choice, 3, {"a", "b"}), bad);
        CHECK_THROWS_AS(g.engine(), Error);
    }

    TEST_CASE("engine round trip keeps scores")
    {
        Fixture f;
        ExpertAnswer multi;
        multi.options = {"A", "C"};
        f.add(choice("m", QuestionType::multi_choice, 2, {"A", "B", "C"}), multi);
        f.add(plain("w", QuestionType::short_answer, 4), phrases({"red giant", "giant star"}));
        auto e = f.engine();
        auto back = EvaluationEngine::from_value(decode_canonical(encode_canonical(e.to_value())));
        CHECK(back.to_value() == e.to_value());
        CHECK(evaluate_answer(back, "m", list({"C"})) == evaluate_answer(e, "m", list({"C"})));
        CHECK(evaluate_answer(back, "w", "a giant") == evaluate_answer(e, "w", "a giant"));
    }

    TEST_CASE("adaptive selection and clamping")
    {
        Fixture f;
        f.add(plain("d2", QuestionType::numeric, 2), numeric(1, 0));
        f.add(plain("d3", QuestionType::numeric, 3), numeric(1, 0));
        f.add(plain("d4", QuestionType::numeric, 4), numeric(1, 0));
        f.add(plain("d5", QuestionType::numeric, 5), numeric(1, 0));
        auto e = f.engine(3);
        auto s = start_session(e, "sid", "stu");
        auto q = issue_next(e, s);
        REQUIRE(q);
        CHECK(q->id == "d3");
        s = record_answer(e, s, "d3", 1);
        CHECK(s.current_difficulty == 4);
        q = issue_next(e, s);
        CHECK(q->id == "d4");
        s = record_answer(e, s, "d4", 0);
        CHECK(s.current_difficulty == 3);
        q = issue_next(e, s);
        CHECK(q->id == "d2"); // 2 and 4 tie... d4 asked; 2 is at distance 1, 5 at 2
        s = record_answer(e, s, "d2", 1);
        CHECK_FALSE(issue_next(e, s).has_value());
        CHECK(s.finished);
    }

    TEST_CASE("ties prefer lower difficulty then id")
    {
        Fixture f;
        f.add(plain("b4", QuestionType::numeric, 4), numeric(1, 0));
        f.add(plain("a2", QuestionType::numeric, 2), numeric(1, 0));
        f.add(plain("c2", QuestionType::numeric, 2), numeric(1, 0));
        auto e = f.engine();
        auto s = start_session(e, "sid", "stu");
        CHECK(issue_next(e, s)->id == "a2");
    }

    TEST_CASE("difficulty clamps at both ends and steps up at one half")
    {
        AdaptivePolicy p;
        CHECK(p.next_difficulty(5, Rational(1)) == 5);
        CHECK(p.next_difficulty(1, Rational(0)) == 1);
        CHECK(p.next_difficulty(2, Rational(1, 2)) == 3);
        CHECK(p.next_difficulty(2, Rational(49, 100)) == 1);
    }

    TEST_CASE("answers must match the issued question")
    {
        Fixture f;
        f.add(plain("x", QuestionType::numeric, 3), numeric(1, 0));
        f.add(plain("y", QuestionType::numeric, 3), numeric(1, 0));
        auto e = f.engine();
        auto s = start_session(e, "sid", "stu");
        issue_next(e, s);
        CHECK_THROWS_AS(record_answer(e, s, "y", 1), Error);
        s = record_answer(e, s, "x", 1);
        try {
            record_answer(e, s, "x", 1);
            FAIL("expected duplicate");
        } catch (const Error& err) {
            CHECK(err.code() == Errc::duplicate_answer);
        }
    }

    TEST_CASE("grading")
    {
        Fixture f;
        f.add(plain("a", QuestionType::numeric, 3, Rational(1)), numeric(1, 0));
        f.add(plain("b", QuestionType::numeric, 3, Rational(1)), numeric(1, 0));
        f.add(plain("c", QuestionType::short_answer, 3, Rational(2)), phrases({"alpha beta"}));
        auto e = f.engine();
        auto s = start_session(e, "sid", "stu");
        CHECK_THROWS_AS(grade_session(e, s), Error);
        std::map<std::string, Value> answers{{"a", 1}, {"b", 0}, {"c", "alpha"}};
        while (auto q = issue_next(e, s))
            s = record_answer(e, s, q->id, answers[q->id]);
        auto r = grade_session(e, s, 1234);
        CHECK(r.grade == 50); // weights (1,1,2) scores (1,0,1/2)
        CHECK(r.scores.size() == 3);
        CHECK(r.timestamp_ms == 1234);
        CHECK(TestResult::from_value(r.to_value()).to_value() == r.to_value());

        auto quit = start_session(e, "q", "stu");
        finish_session(quit);
        CHECK(grade_session(e, quit).grade == 0);
    }

    TEST_CASE("question views carry no answers")
    {
        Fixture f;
        f.add(plain("w", QuestionType::short_answer, 3), phrases({"secret phrase"}));
        auto e = f.engine();
        auto v = to_value(e.question("w"));
        CHECK(v.find("answer") == nullptr);
        CHECK(v.find("phrases") == nullptr);
    }

    TEST_CASE("test validation")
    {
        Test t;
        t.id = "t";
        CHECK_FALSE(validate_test(t).empty());
        t.question_ids = {"a", "a"};
        t.max_questions = 1;
        CHECK_FALSE(validate_test(t).empty());
        t.question_ids = {"a", "b"};
        t.max_questions = 3;
        CHECK_FALSE(validate_test(t).empty());
        t.max_questions = 2;
        CHECK(validate_test(t).empty());
    }
}
