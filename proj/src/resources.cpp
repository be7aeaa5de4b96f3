#include "egr/resources.hpp"

namespace egr {

std::string_view builtin_lexicon_text() {
  static constexpr std::string_view kText = R"(# word,emotion,weight
frustrated,frustration,0.9
frustrating,frustration,0.9
frustration,frustration,0.9
annoyed,frustration,0.8
annoying,frustration,0.8
annoys,frustration,0.7
irritated,frustration,0.8
irritating,frustration,0.8
pointless,frustration,1
useless,frustration,1
ridiculous,frustration,0.9
waste,frustration,0.7
wasted,frustration,0.7
wasting,frustration,0.7
seriously,frustration,0.5
unbelievable,frustration,0.7
nonsense,frustration,0.8
hopeless,frustration,0.7
ugh,frustration,0.8
argh,frustration,0.8
confusing,frustration,0.6
confused,frustration,0.6
pathetic,frustration,0.9
stupid,frustration,0.9
dumb,frustration,0.8
incompetent,frustration,0.9
worthless,frustration,0.9
garbage,frustration,0.9
clueless,frustration,0.8
unhelpful,frustration,0.9
fed,frustration,0.5
tired,frustration,0.5
sick,frustration,0.5
whatever,frustration,0.4
meaningless,frustration,0.8
senseless,frustration,0.8
aggravating,frustration,0.9
exasperating,frustration,1
exhausting,frustration,0.7
tedious,frustration,0.7
fail,frustration,0.6
failed,frustration,0.6
failing,frustration,0.6
fails,frustration,0.6
nightmare,frustration,0.8
mess,frustration,0.6
absurd,frustration,0.8
idiotic,frustration,0.9
angry,anger,0.9
furious,anger,1
mad,anger,0.8
outraged,anger,1
livid,anger,1
hate,anger,0.9
hated,anger,0.9
hates,anger,0.9
rage,anger,0.9
pissed,anger,0.9
infuriating,anger,1
infuriated,anger,1
unacceptable,anger,0.9
worst,anger,0.9
scam,anger,0.9
damn,anger,0.7
insulting,anger,0.8
rude,anger,0.8
disgrace,anger,0.9
outrageous,anger,0.9
enraged,anger,1
annoyance,anger,0.6
hostile,anger,0.8
resent,anger,0.8
fuming,anger,1
irate,anger,1
cheated,anger,0.8
lied,anger,0.8
liar,anger,0.9
sucks,anger,0.8
terrible,anger,0.7
awful,anger,0.7
horrible,anger,0.8
sad,sadness,0.9
unhappy,sadness,0.8
disappointed,sadness,0.8
disappointing,sadness,0.7
disappointment,sadness,0.8
upset,sadness,0.8
miserable,sadness,0.9
depressed,sadness,0.9
heartbroken,sadness,1
regret,sadness,0.7
unfortunately,sadness,0.5
lonely,sadness,0.7
cry,sadness,0.8
crying,sadness,0.8
gloomy,sadness,0.7
sorrow,sadness,0.9
hurt,sadness,0.7
devastated,sadness,1
gutted,sadness,0.9
dismayed,sadness,0.8
discouraged,sadness,0.8
helpless,sadness,0.8
defeated,sadness,0.8
unfortunate,sadness,0.6
grief,sadness,0.9
tragic,sadness,0.9
bummed,sadness,0.7
sigh,sadness,0.6
afraid,fear,0.8
scared,fear,0.8
worried,fear,0.7
worry,fear,0.6
anxious,fear,0.8
nervous,fear,0.7
panic,fear,0.9
panicking,fear,0.9
terrified,fear,1
fear,fear,0.8
concerned,fear,0.5
alarmed,fear,0.7
uneasy,fear,0.6
dread,fear,0.8
frightened,fear,0.9
frightening,fear,0.9
scary,fear,0.8
threatened,fear,0.8
insecure,fear,0.6
unsafe,fear,0.8
risky,fear,0.6
doubt,fear,0.5
doubtful,fear,0.6
disgusting,disgust,1
disgusted,disgust,1
gross,disgust,0.8
nasty,disgust,0.8
revolting,disgust,0.9
appalling,disgust,0.9
appalled,disgust,0.9
shameful,disgust,0.8
vile,disgust,0.9
sleazy,disgust,0.8
repulsive,disgust,0.9
shocking,disgust,0.7
dreadful,disgust,0.8
sickening,disgust,0.9
happy,happiness,0.9
glad,happiness,0.8
great,happiness,0.8
awesome,happiness,0.9
excellent,happiness,0.9
wonderful,happiness,0.9
fantastic,happiness,0.9
amazing,happiness,0.9
perfect,happiness,0.9
good,happiness,0.5
nice,happiness,0.6
love,happiness,0.8
lovely,happiness,0.8
cool,happiness,0.5
yay,happiness,0.9
delighted,happiness,1
pleased,happiness,0.8
excited,happiness,0.8
fun,happiness,0.7
brilliant,happiness,0.9
superb,happiness,0.9
cheerful,happiness,0.8
enjoy,happiness,0.7
enjoyed,happiness,0.7
terrific,happiness,0.9
splendid,happiness,0.9
marvelous,happiness,0.9
joy,happiness,0.9
smile,happiness,0.7
wow,happiness,0.6
sweet,happiness,0.6
outstanding,happiness,0.9
thanks,gratitude,0.9
thank,gratitude,0.9
thx,gratitude,0.8
grateful,gratitude,1
appreciate,gratitude,0.9
appreciated,gratitude,0.9
cheers,gratitude,0.7
ty,gratitude,0.7
thankful,gratitude,1
gracias,gratitude,0.8
helpful,satisfaction,0.9
satisfied,satisfaction,0.9
solved,satisfaction,0.8
resolved,satisfaction,0.8
useful,satisfaction,0.8
convenient,satisfaction,0.7
sorted,satisfaction,0.6
smooth,satisfaction,0.6
easy,satisfaction,0.5
works,satisfaction,0.4
worked,satisfaction,0.4
fine,satisfaction,0.4
clear,satisfaction,0.4
quick,satisfaction,0.4
fast,satisfaction,0.4
handy,satisfaction,0.7
excellent,satisfaction,0.8
upset,anger,0.4
terrible,disgust,0.5
awful,disgust,0.5
horrible,fear,0.3
disappointing,frustration,0.5
hopeless,sadness,0.6
useless,anger,0.4
pointless,sadness,0.3
hate,disgust,0.5
worst,frustration,0.6)";
  return kText;
}

std::string_view builtin_not_trained_patterns() {
  static constexpr std::string_view kText = R"(not trained
still learning
not been trained
haven't been trained
re:\bi (do not|don't|didn't|did not) (understand|know how to help)
not sure i understand
re:\bi can('t|not) help (you )?with that
not able to answer
rephrase your question
try rephrasing
outside of what i can
beyond what i can
)";
  return kText;
}

std::string_view builtin_human_request_patterns() {
  static constexpr std::string_view kText = R"(re:\b(real|live|actual) (person|human|agent|people)\b
re:\bhuman\b
re:\b(talk|speak|chat) (to|with) (someone|somebody|a person|a human|an agent|a representative|a rep|an operator|customer service|a real|a live|an actual)
re:\b(representative|operator)\b
re:\bare you (a )?(bot|robot|machine|computer|real|human|person)\b
re:\blive (agent|chat|support)\b
re:\b(transfer|connect|escalate) me\b
re:\bagent please\b
re:\bget me (a|an) (person|human|agent)\b
)";
  return kText;
}

}  // namespace egr
