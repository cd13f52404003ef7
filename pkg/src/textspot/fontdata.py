"""Embedded 5x7 bitmap font and the bundled word list.

Every glyph fills its full 5x7 cell bounding box (at least one pixel on each
edge row and column), so the tight box around a rendered word is exact cell
arithmetic: width = (5n + n - 1) * scale for an n-glyph word, height = 7 * scale.
"""

GLYPH_W = 5
GLYPH_H = 7
GLYPH_GAP = 1  # empty columns between adjacent glyphs

_RAW = {
    "a": (".XXX.",
          "X...X",
          "X...X",
          "XXXXX",
          "X...X",
          "X...X",
          "X...X"),
    "b": ("XXXX.",
          "X...X",
          "X...X",
          "XXXX.",
          "X...X",
          "X...X",
          "XXXX."),
    "c": (".XXXX",
          "X....",
          "X....",
          "X....",
          "X....",
          "X....",
          ".XXXX"),
    "d": ("XXXX.",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          "XXXX."),
    "e": ("XXXXX",
          "X....",
          "X....",
          "XXXX.",
          "X....",
          "X....",
          "XXXXX"),
    "f": ("XXXXX",
          "X....",
          "X....",
          "XXXX.",
          "X....",
          "X....",
          "X...."),
    "g": (".XXXX",
          "X....",
          "X....",
          "X..XX",
          "X...X",
          "X...X",
          ".XXXX"),
    "h": ("X...X",
          "X...X",
          "X...X",
          "XXXXX",
          "X...X",
          "X...X",
          "X...X"),
    "i": ("XXXXX",
          "..X..",
          "..X..",
          "..X..",
          "..X..",
          "..X..",
          "XXXXX"),
    "j": ("XXXXX",
          "....X",
          "....X",
          "....X",
          "....X",
          "X...X",
          ".XXX."),
    "k": ("X...X",
          "X..X.",
          "X.X..",
          "XX...",
          "X.X..",
          "X..X.",
          "X...X"),
    "l": ("X....",
          "X....",
          "X....",
          "X....",
          "X....",
          "X....",
          "XXXXX"),
    "m": ("X...X",
          "XX.XX",
          "X.X.X",
          "X.X.X",
          "X...X",
          "X...X",
          "X...X"),
    "n": ("X...X",
          "XX..X",
          "XX..X",
          "X.X.X",
          "X..XX",
          "X..XX",
          "X...X"),
    "o": (".XXX.",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          ".XXX."),
    "p": ("XXXX.",
          "X...X",
          "X...X",
          "XXXX.",
          "X....",
          "X....",
          "X...."),
    "q": (".XXX.",
          "X...X",
          "X...X",
          "X...X",
          "X.X.X",
          "X..X.",
          ".XX.X"),
    "r": ("XXXX.",
          "X...X",
          "X...X",
          "XXXX.",
          "X.X..",
          "X..X.",
          "X...X"),
    "s": (".XXXX",
          "X....",
          "X....",
          ".XXX.",
          "....X",
          "....X",
          "XXXX."),
    "t": ("XXXXX",
          "..X..",
          "..X..",
          "..X..",
          "..X..",
          "..X..",
          "..X.."),
    "u": ("X...X",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          "X...X",
          ".XXX."),
    "v": ("X...X",
          "X...X",
          "X...X",
          "X...X",
          ".X.X.",
          ".X.X.",
          "..X.."),
    "w": ("X...X",
          "X...X",
          "X...X",
          "X.X.X",
          "X.X.X",
          "XX.XX",
          "X...X"),
    "x": ("X...X",
          "X...X",
          ".X.X.",
          "..X..",
          ".X.X.",
          "X...X",
          "X...X"),
    "y": ("X...X",
          "X...X",
          ".X.X.",
          "..X..",
          "..X..",
          "..X..",
          "..X.."),
    "z": ("XXXXX",
          "....X",
          "...X.",
          "..X..",
          ".X...",
          "X....",
          "XXXXX"),
    "0": (".XXX.",
          "X...X",
          "X..XX",
          "X.X.X",
          "XX..X",
          "X...X",
          ".XXX."),
    "1": ("..X..",
          ".XX..",
          "X.X..",
          "..X..",
          "..X..",
          "..X.X",
          "XXXXX"),
    "2": (".XXX.",
          "X...X",
          "....X",
          "...X.",
          "..X..",
          ".X...",
          "XXXXX"),
    "3": ("XXXX.",
          "....X",
          "....X",
          ".XXX.",
          "....X",
          "....X",
          "XXXX."),
    "4": ("X..X.",
          "X..X.",
          "X..X.",
          "XXXXX",
          "...X.",
          "...X.",
          "..XXX"),
    "5": ("XXXXX",
          "X....",
          "X....",
          "XXXX.",
          "....X",
          "....X",
          "XXXX."),
    "6": (".XXXX",
          "X....",
          "X....",
          "XXXX.",
          "X...X",
          "X...X",
          ".XXX."),
    "7": ("XXXXX",
          "....X",
          "...X.",
          "..X..",
          ".X...",
          "X....",
          "X...."),
    "8": (".XXX.",
          "X...X",
          "X...X",
          ".XXX.",
          "X...X",
          "X...X",
          ".XXX."),
    "9": (".XXX.",
          "X...X",
          "X...X",
          ".XXXX",
          "....X",
          "....X",
          "XXXX."),
    "#": (".X.X.",
          "XXXXX",
          ".X.X.",
          ".X.X.",
          "XXXXX",
          ".X.X.",
          ".X.X."),
}


def raw_glyphs() -> dict:
    return dict(_RAW)


_WORDS = """
able about accept account act action address admit advance afford after
against age agree ahead allow almost alone already also amount and animal
annual answer apart appeal apple apply area argue army around arrive article
ask attack attempt aunt author autumn awake award baby back bag balance ball
bank bar basic basket beach bear beauty become bed begin behind bell belong
belt bench benefit best better beyond big bird birth black blame blank block
blood blue board body bone book born borrow both bottle bowl box boy branch
brave break breath bridge brief bring broad brother brush budget burn bus busy
butter button cabin cake calm camera can cap captain car card career careful
case cash cat catch cause center century chain chair change channel charge
chart cheap cheese chest chief child choose church circle civil claim clean
clear clever click client clock close cloud club coal coast code coffee cold
college color come comfort comment common company computer concern confirm
connect contact contain contest context control cool copy corner correct
cotton could count county couple course court cow crack craft cream create
crew crime crop cross crown cry culture current curve cut cycle damage dance
danger data date day dead dear debate decade decide deep degree deliver deny
depend desert design desire detail device direct dish divide doctor dog domain
door doubt down draft drama dream dress drink drop dry due during duty each
eager early earn east easy edge editor effort egg eight elect element else
empty enemy energy engine enough enter entry equal escape estate even event
ever exact example exist exit expect expert explain eye face factor fail faith
fall false famous fan farm fast father fault fear feature feed fellow female
few field fifth fifty fight file fill final find finger finish fire first fish
five fix flat flavor flow flower fly fold follow foot force forest forget form
former fort fortune forty found four frame free fresh from front fuel full
future gain game garden gas gather gave general gentle gift give glad global
goal golf good grade grain grand grass gray green group growth guard guess
guide gun hair half hand handle happen happy hard hat have health hear heat
heavy height help her hero hide hill him hire hit hold home honest hope horse
hotel hour house huge human hunt hurry ice idea ill impact import income
indeed industry info instead intend interest invite iron issue item job join
joint journal journey judge juice jump june keep key kick kind king knee knife
know label labor lady lake language large late laugh launch lawyer lay lead
leader league learn leather leave left legal lemon length less let letter
level life lift like limit link lion listen little live local lock long look
loss lot loud low lower lunch machine mail main major male man manner many
march margin market marry mass match material may maybe meal mean measure
media medium member memory menu mere message metal meter middle might milk
mind minor minute mirror mission mistake mixture model moment money month
moral more most mother motor mount mouth move movie murder muscle music must
myself name narrow native nature neck need net never news next nice nine noise
noon nor north nose note notice novel number nurse occur ocean odd offer
office oil okay once one only open opinion orange order other ought out
outside oven owner pace page pain pair palace paper parent park party pass
path patient pause pay peace pen people per percent perform period permit
phase phone phrase piano picture piece pilot pine pink pitch place plane
planet plastic plate play please plenty plus pocket poet point policy polite
pool pop popular pose position pot potato pound practice praise prepare
present pretty prevent pride prime print prison private problem process profit
program project proof proper proud prove public pull pump pure purple push put
quarter queen quick quiet quite race radio rain raise rank rapid rare rather
raw read ready reason recall recent record red refer reflect refuse region
regular reject relate release relief remain remark remind remote remove repair
repeat report rescue reserve resist rest result return review reward rich ride
ring rise risk road rock roll roof root rope rough round route royal rule
rural rush safe sail salad sale salt sample sand scale scene scheme science
score sea search seat second section sector secure seed seek select self
senate send senior series serious service set seven several shadow shake shall
share sharp sheet shelf shelter shift shine shirt shock shoot shop short shot
should shout show shut sick sight sign silent silver simple sing single sister
sit six size skill sky sleep slide slight slow small smell smile smoke snow
soap soft soil soldier solid solve son song sort soul soup source south spare
speak speech speed spend spirit spoon sport spot spread spring staff stage
stake stand standard stare start station stay steal steam step stick still
stomach stone store storm straight strange stream stress stretch string strong
study stuff style succeed such sugar suggest summer sun support sure surface
survive sweet switch symbol table tail take talent talk tank tap task taste
tea teach team tell ten tennis term text than thank the theme theory there
thin thing think thirty this thousand threat throat through thus ticket tide
tight time tip tired today toe together tone tongue too tool top topic touch
tough tour tower town track trade trail train transfer treat tree trial trick
trouble truck trust truth try turn twelve twice two uncle under union unit
until upper upset urge use useful valley value vast vehicle very victim view
village violent visual vital volume vote wait wake walk want war warn wash
watch water way weak wealth wear weather wedding week weight welcome well wet
what when where while white who whose wide wild will wind window wing winner
winter wise wish within witness wonder wood word worker world worth would wrap
write yard yeah year yes yet your youth zone
"""

LEXICON: tuple = tuple(_WORDS.split())
