#!/usr/bin/env python3
"""Freeze reference lemmas for crates/core/tests/fixtures/lemma_reference.tsv.

The lemmas come from lemminflect (an independent morphological analyzer);
run once and commit the output. usage: gen_lemma_fixture.py > lemma_reference.tsv
"""
from lemminflect import getLemma

NOUN = """cats dogs doctors specialists hospitals patients boxes churches dishes buses glasses dresses
classes cities babies ladies parties stories countries families knives wives lives leaves wolves shelves
halves men women children feet teeth mice people heroes potatoes tomatoes echoes photos pianos radios
days keys toys boys monkeys houses roses noses cases prizes horses bridges pages judges places faces
ideas problems questions answers friends parents teachers students games movies shoes clothes
news series species bikes cars trains planes trips vacations schedules dialogues concepts triples
jobs bosses raises hours plans kids dogs' birds flowers trees apples oranges bananas cookies
desserts restaurants promotions workers employers functions events contexts names watches wishes
foxes taxes quizzes analyses crises theses bases doctor specialist hospital patient dog cat city""".split()

VERB = """looking looked looks want wants wanted wanting find finds finding found running ran runs
stopped stopping stops planned planning hoping hoped hopes using used uses making made makes taking took
taken coming came comes going went gone goes seeing saw seen sees eating ate eaten writing wrote written
sitting sat swimming swam getting got gotten putting cutting hitting beginning began begun tried trying
tries cried carries carried studying studied played playing plays stayed enjoyed dying died lying tying
tied baked baking liked liking loved loving moved moving lived living hated hating saved saving shared
sharing decided deciding arrived arriving celebrated celebrating worked working walked walking talked
talking helped helping needed needing visited visiting opened opening listened listening happened
waited waiting cooked cooking asked asking called calling telling told missed missing passed passing
fixed fixing watched watching wished washing pushed kissed finished finishing reached searched brought
bought thought caught taught felt kept slept left meant sent spent built lost paid said sold held
stood understood fell flew drew knew grew threw drove rode rose chose spoke broke froze woke wore
tore swore stole gave forgave forgot hid bit shook mistook dug stuck struck swung hung sang rang drank
admitted preferred occurred referred committed controlled traveled travelled labeled scheduled
messaged performed earned deserved recognized rewarded dressed expected""".split()

ADJ = """bigger biggest hotter hottest larger largest nicer nicest happier happiest easier easiest
faster fastest taller tallest smaller smallest older oldest younger youngest better best worse worst
cheaper cheapest busier busiest simpler simplest wider widest later latest general great good happy
proud""".split()


def main():
    print("# word\tpos\treference lemma (lemminflect 0.2.3, first candidate)")
    seen = set()
    for pos, words in (("NOUN", NOUN), ("VERB", VERB), ("ADJ", ADJ)):
        for w in words:
            w = w.strip("'")
            if (w, pos) in seen:
                continue
            seen.add((w, pos))
            lemmas = getLemma(w, upos=pos)
            if lemmas:
                print(f"{w}\t{pos}\t{lemmas[0].lower()}")


if __name__ == "__main__":
    main()
