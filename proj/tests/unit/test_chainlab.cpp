// Copyright 2026 The comit-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include "comit/chainlab/ledger.hpp"
#include "comit/chainlab/wallet.hpp"

#include <fstream>
#include <random>

using namespace comit;
using namespace comit::chainlab;

namespace {

struct Fixture
{
    std::shared_ptr<KeyRegistry> keys = std::make_shared<KeyRegistry>();
    KeyPair alice = keys->create("alice");
    KeyPair bob = keys->create("bob");
    KeyPair carol = keys->create("carol");
    Ledger ledger{ChainParams{"btc", "BTC", {HashFnId::Sha256}, 1, 0}, keys, 100};

    Outpoint fund(const KeyPair& who, Amount amount) { return ledger.credit_genesis(Script{PayToKey{who.pub}}, amount); }

    Transaction spend(const Outpoint& op, Amount amount, const KeyPair& signer, Script to, Height locktime = 0)
    {
        Transaction tx;
        tx.inputs.push_back(TxIn{op, {}});
        tx.outputs.push_back(TxOut{amount, std::move(to)});
        tx.locktime = locktime;
        tx.inputs[0].witness = pay_to_key_witness(signer, tx.txid());
        return tx;
    }
};

std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("hash_digest matches golden vectors")
{
    const std::vector<Bytes> inputs{Bytes{}, Bytes(32, 0), Bytes{'a', 'b', 'c'}};
    const std::pair<HashFnId, const char*> files[] = {
        {HashFnId::Sha256, "sha256.txt"},
        {HashFnId::Sha3_256, "sha3_256.txt"},
        {HashFnId::Blake2b_256, "blake2b_256.txt"},
    };
    for (const auto& [fn, file] : files)
    {
        auto lines = read_lines(std::string(COMIT_TEST_VECTORS_DIR) + "/" + file);
        REQUIRE(lines.size() == inputs.size());
        for (std::size_t i = 0; i < inputs.size(); ++i)
            CHECK(to_hex(hash_digest(fn, inputs[i])) == lines[i]);
    }
    CHECK(to_hex(hash_digest(HashFnId::Sha256, Bytes{})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("hash_digest is deterministic and rejects unknown identifiers")
{
    Bytes data{1, 2, 3, 4};
    for (auto fn : {HashFnId::Sha256, HashFnId::Sha3_256, HashFnId::Blake2b_256})
        CHECK(hash_digest(fn, data) == hash_digest(fn, data));
    CHECK_THROWS_AS(hash_digest(static_cast<HashFnId>(42), data), UnknownHashFunction);
    CHECK_THROWS_AS(parse_hash_fn("MD5"), UnknownHashFunction);
    CHECK(parse_hash_fn("SHA3_256") == HashFnId::Sha3_256);
}

TEST_CASE("script serialization round-trips nested scripts")
{
    Fixture f;
    auto s = make_or(Script{TimeLockRel{6, f.alice.pub}},
                     make_or(Script{HashLock{HashFnId::Sha256, Hash32{}, f.bob.pub}},
                             Script{HtlcScript{HashFnId::Blake2b_256, Hash32{1}, f.bob.pub, f.alice.pub, 7}}));
    CHECK(Script::deserialize(s.serialize()) == s);
    CHECK(or_depth(s) == 2);
    CHECK(well_formed(s));
    CHECK_FALSE(well_formed(make_or(s, Script{PayToKey{f.alice.pub}})));
    CHECK_FALSE(well_formed(Script{HtlcScript{HashFnId::Sha256, Hash32{}, f.bob.pub, f.alice.pub, 0}}));
}

TEST_CASE("submit_tx accepts a valid spend and rejects double spends")
{
    Fixture f;
    auto op = f.fund(f.alice, 1000);

    auto tx1 = f.spend(op, 1000, f.alice, Script{PayToKey{f.bob.pub}});
    CHECK(f.ledger.submit_tx(tx1).accepted());

    auto tx2 = f.spend(op, 900, f.alice, Script{PayToKey{f.carol.pub}});
    CHECK(f.ledger.submit_tx(tx2).reason == RejectReason::Conflict);

    f.ledger.mine_blocks(1);
    CHECK(f.ledger.confirmation_height(tx1.txid()) == 101);
    CHECK(f.ledger.submit_tx(tx2).reason == RejectReason::Conflict);
    CHECK(f.ledger.balance(f.bob.pub) == 1000);
}

TEST_CASE("submit_tx rejection reasons")
{
    Fixture f;
    auto op = f.fund(f.alice, 1000);

    SUBCASE("unknown outpoint")
    {
        Outpoint ghost{Hash32{9}, 0};
        CHECK(f.ledger.submit_tx(f.spend(ghost, 1, f.alice, Script{PayToKey{f.bob.pub}})).reason ==
              RejectReason::UnknownOutpoint);
    }
    SUBCASE("wrong signer")
    {
        CHECK(f.ledger.submit_tx(f.spend(op, 10, f.bob, Script{PayToKey{f.bob.pub}})).reason ==
              RejectReason::InvalidWitness);
    }
    SUBCASE("outputs exceed inputs")
    {
        CHECK(f.ledger.submit_tx(f.spend(op, 1001, f.alice, Script{PayToKey{f.bob.pub}})).reason ==
              RejectReason::InsufficientValue);
    }
    SUBCASE("duplicate inputs")
    {
        auto tx = f.spend(op, 10, f.alice, Script{PayToKey{f.bob.pub}});
        tx.inputs.push_back(tx.inputs.front());
        CHECK(f.ledger.submit_tx(tx).reason == RejectReason::Malformed);
    }
    SUBCASE("output overflow")
    {
        Transaction tx;
        tx.inputs.push_back(TxIn{op, {}});
        tx.outputs.push_back(TxOut{~Amount{0}, Script{PayToKey{f.bob.pub}}});
        tx.outputs.push_back(TxOut{2, Script{PayToKey{f.bob.pub}}});
        tx.inputs[0].witness = pay_to_key_witness(f.alice, tx.txid());
        CHECK(f.ledger.submit_tx(tx).reason == RejectReason::ValueOverflow);
    }
}

TEST_CASE("flat fee is required and burned")
{
    auto keys = std::make_shared<KeyRegistry>();
    auto alice = keys->create("alice");
    auto bob = keys->create("bob");
    Ledger ledger{ChainParams{"eth", "ETH", {HashFnId::Sha3_256}, 1, 10}, keys};
    ledger.credit_genesis(Script{PayToKey{alice.pub}}, 100);
    auto tx = make_payment(ledger, alice, bob.pub, 50);
    REQUIRE(ledger.submit_tx(tx).accepted());
    ledger.mine_blocks(1);
    CHECK(ledger.balance(bob.pub) == 50);
    CHECK(ledger.balance(alice.pub) == 40);
    CHECK(ledger.burned_fees() == 10);
    CHECK(ledger.utxo_total() + ledger.burned_fees() == ledger.genesis_total());
    CHECK_THROWS_AS(make_payment(ledger, alice, bob.pub, 35), InsufficientFunds);
}

TEST_CASE("mine_blocks on an empty mempool only advances height")
{
    Fixture f;
    f.fund(f.alice, 5);
    auto before = f.ledger.utxos().size();
    CHECK(f.ledger.mine_blocks(3) == 103);
    CHECK(f.ledger.utxos().size() == before);
    CHECK_THROWS(f.ledger.mine_blocks(0));
}

TEST_CASE("absolute locktime is enforced at mining time")
{
    Fixture f;
    auto op = f.fund(f.alice, 100);
    auto tx = f.spend(op, 100, f.alice, Script{PayToKey{f.bob.pub}}, f.ledger.height() + 2);
    REQUIRE(f.ledger.submit_tx(tx).accepted());
    f.ledger.mine_blocks(1);
    CHECK_FALSE(f.ledger.confirmation_height(tx.txid()).has_value());
    f.ledger.mine_blocks(1);
    CHECK(f.ledger.confirmation_height(tx.txid()) == 102);
}

TEST_CASE("relative lock: earliest confirmation is H + delta for every mining schedule")
{
    // Oracle: enumerate every split of 1..10 blocks into mining calls and record
    // the earliest block in which the spend confirms.
    for (int total = 1; total <= 10; ++total)
    {
        for (unsigned mask = 0; mask < (1u << (total - 1)); ++mask)
        {
            Fixture f;
            auto op = f.fund(f.alice, 100);
            auto lock = f.spend(op, 100, f.alice, Script{TimeLockRel{5, f.bob.pub}});
            REQUIRE(f.ledger.submit_tx(lock).accepted());
            f.ledger.mine_blocks(1);
            const Height conf = *f.ledger.confirmation_height(lock.txid());

            auto sweep = f.spend(Outpoint{lock.txid(), 0}, 100, f.bob, Script{PayToKey{f.bob.pub}});
            REQUIRE(f.ledger.submit_tx(sweep).accepted());

            // Break `total` blocks into runs according to mask bits.
            int run = 1;
            for (int i = 0; i < total; ++i)
            {
                bool cut = i == total - 1 || ((mask >> i) & 1u);
                if (cut)
                {
                    f.ledger.mine_blocks(run);
                    run = 1;
                }
                else
                    ++run;
            }
            auto h = f.ledger.confirmation_height(sweep.txid());
            if (conf + 5 <= f.ledger.height())
            {
                REQUIRE(h.has_value());
                CHECK(*h == conf + 5);
            }
            else
                CHECK_FALSE(h.has_value());
        }
    }
}

TEST_CASE("verify_script examples")
{
    Fixture f;
    const Hash32 digest = sha256(as_bytes("tx"));
    Bytes secret(32, 7);
    const Hash32 h = hash_digest(HashFnId::Sha256, secret);

    SUBCASE("multisig needs both signatures")
    {
        Script s{Multisig2of2{f.alice.pub, f.bob.pub}};
        Witness both{{sign(f.alice, digest), sign(f.bob, digest)}, {}, {}};
        Witness one{{sign(f.alice, digest)}, {}, {}};
        Witness twice{{sign(f.alice, digest), sign(f.alice, digest)}, {}, {}};
        CHECK(verify_script(s, both, {10, 1, digest}, *f.keys));
        CHECK_FALSE(verify_script(s, one, {10, 1, digest}, *f.keys));
        CHECK_FALSE(verify_script(s, twice, {10, 1, digest}, *f.keys));
    }
    SUBCASE("htlc claim and refund")
    {
        Script s{HtlcScript{HashFnId::Sha256, h, f.bob.pub, f.alice.pub, 50}};
        Witness claim{{sign(f.bob, digest)}, {secret}, {}};
        Witness bad{{sign(f.bob, digest)}, {Bytes(32, 8)}, {}};
        Witness refund{{sign(f.alice, digest)}, {}, {}};
        CHECK(verify_script(s, claim, {49, 1, digest}, *f.keys));
        CHECK_FALSE(verify_script(s, bad, {49, 1, digest}, *f.keys));
        CHECK_FALSE(verify_script(s, refund, {49, 1, digest}, *f.keys));
        CHECK(verify_script(s, refund, {50, 1, digest}, *f.keys));
    }
    SUBCASE("time locks")
    {
        Witness w{{sign(f.alice, digest)}, {}, {}};
        CHECK_FALSE(verify_script(Script{TimeLockAbs{20, f.alice.pub}}, w, {19, 1, digest}, *f.keys));
        CHECK(verify_script(Script{TimeLockAbs{20, f.alice.pub}}, w, {20, 1, digest}, *f.keys));
        CHECK_FALSE(verify_script(Script{TimeLockRel{6, f.alice.pub}}, w, {15, 10, digest}, *f.keys));
        CHECK(verify_script(Script{TimeLockRel{6, f.alice.pub}}, w, {16, 10, digest}, *f.keys));
        CHECK_FALSE(verify_script(Script{TimeLockRel{0, f.alice.pub}}, w, {9, 10, digest}, *f.keys));
    }
    SUBCASE("or needs a selector and honours it")
    {
        auto s = make_or(Script{TimeLockRel{6, f.alice.pub}}, Script{HashLock{HashFnId::Sha256, h, f.bob.pub}});
        Witness revoke{{sign(f.bob, digest)}, {secret}, std::uint8_t{1}};
        Witness no_sel{{sign(f.bob, digest)}, {secret}, {}};
        Witness wrong_sel{{sign(f.bob, digest)}, {secret}, std::uint8_t{0}};
        CHECK(verify_script(s, revoke, {11, 10, digest}, *f.keys));
        CHECK_FALSE(verify_script(s, no_sel, {11, 10, digest}, *f.keys));
        CHECK_FALSE(verify_script(s, wrong_sel, {11, 10, digest}, *f.keys));
    }
    SUBCASE("verify_script is pure")
    {
        Script s{HashLock{HashFnId::Sha256, h, f.bob.pub}};
        Witness w{{sign(f.bob, digest)}, {secret}, {}};
        bool first = verify_script(s, w, {5, 1, digest}, *f.keys);
        for (int i = 0; i < 10; ++i)
            CHECK(verify_script(s, w, {5, 1, digest}, *f.keys) == first);
    }
}

TEST_CASE("time-blocked mempool spends are replaced by spends valid in the next block")
{
    Fixture f;
    Bytes secret(32, 3);
    const Hash32 h = hash_digest(HashFnId::Sha256, secret);
    auto op = f.fund(f.alice, 100);
    auto lock = f.spend(op, 100, f.alice,
                        make_or(Script{TimeLockRel{6, f.alice.pub}}, Script{HashLock{HashFnId::Sha256, h, f.bob.pub}}));
    REQUIRE(f.ledger.submit_tx(lock).accepted());
    f.ledger.mine_blocks(1);

    Transaction early;
    early.inputs.push_back(TxIn{Outpoint{lock.txid(), 0}, {}});
    early.outputs.push_back(TxOut{100, Script{PayToKey{f.alice.pub}}});
    early.inputs[0].witness = Witness{{sign(f.alice, early.txid())}, {}, std::uint8_t{0}};
    REQUIRE(f.ledger.submit_tx(early).accepted());

    Transaction justice;
    justice.inputs.push_back(TxIn{Outpoint{lock.txid(), 0}, {}});
    justice.outputs.push_back(TxOut{100, Script{PayToKey{f.bob.pub}}});
    justice.inputs[0].witness = Witness{{sign(f.bob, justice.txid())}, {secret}, std::uint8_t{1}};
    auto res = f.ledger.submit_tx(justice);
    REQUIRE(res.accepted());
    CHECK(res.replaced == std::vector<Hash32>{early.txid()});

    // The ready spend is not replaceable in turn.
    CHECK(f.ledger.submit_tx(early).reason == RejectReason::Conflict);
    f.ledger.mine_blocks(1);
    CHECK(f.ledger.balance(f.bob.pub) == 100);
}

TEST_CASE("property: conservation, no double spend and relative-lock safety on random histories")
{
    std::mt19937_64 rng(0xC0FFEE);
    for (int trial = 0; trial < 40; ++trial)
    {
        auto keys = std::make_shared<KeyRegistry>();
        std::vector<KeyPair> actors;
        for (int i = 0; i < 4; ++i)
            actors.push_back(keys->create("actor" + std::to_string(i)));
        Ledger ledger{ChainParams{"c", "A", {HashFnId::Sha256}, 1, static_cast<Amount>(trial % 3)}, keys};
        for (const auto& a : actors)
            ledger.credit_genesis(Script{PayToKey{a.pub}}, 10'000);

        struct Locked
        {
            Outpoint op;
            std::size_t owner;
            Amount amount;
        };
        std::vector<Locked> locked;
        const Height delta = 1 + trial % 4;

        for (int step = 0; step < 50; ++step)
        {
            auto action = rng() % 4;
            auto& from = actors[rng() % actors.size()];
            auto& to = actors[rng() % actors.size()];
            if (action == 0)
            {
                ledger.mine_blocks(1 + rng() % 2);
                continue;
            }
            if (action == 3 && !locked.empty())
            {
                auto l = locked[rng() % locked.size()];
                if (l.amount <= ledger.params().flat_fee)
                    continue;
                Transaction tx;
                tx.inputs.push_back(TxIn{l.op, {}});
                tx.outputs.push_back(TxOut{l.amount - ledger.params().flat_fee, Script{PayToKey{actors[l.owner].pub}}});
                tx.inputs[0].witness = pay_to_key_witness(actors[l.owner], tx.txid());
                ledger.submit_tx(tx);
                continue;
            }
            auto coins = ledger.spendable(from.pub);
            if (coins.empty())
                continue;
            // Deliberately reuse a coin already spent in the mempool now and then.
            auto [op, amount] = coins[rng() % coins.size()];
            if (amount <= ledger.params().flat_fee)
                continue;
            Amount pay = 1 + rng() % (amount - ledger.params().flat_fee);
            Transaction tx;
            tx.inputs.push_back(TxIn{op, {}});
            bool lock = action == 2;
            std::size_t to_index = static_cast<std::size_t>(&to - actors.data());
            tx.outputs.push_back(
                TxOut{pay, lock ? Script{TimeLockRel{delta, to.pub}} : Script{PayToKey{to.pub}}});
            Amount change = amount - ledger.params().flat_fee - pay;
            if (change > 0)
                tx.outputs.push_back(TxOut{change, Script{PayToKey{from.pub}}});
            tx.inputs[0].witness = pay_to_key_witness(from, tx.txid());
            if (ledger.submit_tx(tx).accepted() && lock)
                locked.push_back(Locked{Outpoint{tx.txid(), 0}, to_index, pay});
            if (rng() % 5 == 0)
            {
                auto dup = tx;
                dup.outputs[0].amount = pay > 1 ? pay - 1 : pay;
                dup.inputs[0].witness = pay_to_key_witness(from, dup.txid());
                auto res = ledger.submit_tx(dup);
                CHECK(res.reason == RejectReason::Conflict);
            }
        }
        ledger.mine_blocks(10);

        CHECK(ledger.utxo_total() + ledger.burned_fees() == ledger.genesis_total());
        CHECK(ledger.utxo_total() <= ledger.genesis_total());

        std::map<Outpoint, int> consumed;
        for (const auto& c : ledger.history())
            for (const auto& in : c.tx.inputs)
                consumed[in.prevout]++;
        for (const auto& [op, n] : consumed)
            CHECK(n == 1);

        for (const auto& c : ledger.history())
            for (const auto& in : c.tx.inputs)
            {
                auto prev = ledger.find_output(in.prevout);
                REQUIRE(prev.has_value());
                if (const auto* rel = std::get_if<TimeLockRel>(&prev->script.node))
                {
                    auto parent = ledger.confirmation_height(in.prevout.txid);
                    REQUIRE(parent.has_value());
                    CHECK(c.height >= *parent + rel->delta_blocks);
                }
            }
    }
}
