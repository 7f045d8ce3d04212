#!/usr/bin/env python3
"""Builds the 100-row labeled prefilter fixture.

Every row carries a hand-assigned label. The script re-derives each label
with a small independent implementation of the cleaning rules and refuses
to write anything when the two disagree.

Outputs (next to this script):
  prefilter_fixture.tsv    raw query<TAB>title<TAB>rank rows
  prefilter_labels.tsv     line<TAB>label (kept, a filter name, or malformed)
  prefilter_golden.report  expected prefilter.report of `qrw prep`
"""
import pathlib
import re
import sys
import unicodedata

HERE = pathlib.Path(__file__).resolve().parent

FILTERS = ["top_rank", "min_chars", "min_tokens", "token_diff", "alnum_ratio", "arabic_ratio"]

SITES = ["فيسبوك", "ويكيبيديا", "يوتيوب", "تويتر", "انستقرام", "انستغرام", "جوجل", "قوقل",
         "لينكد ان", "سناب شات", "تيك توك", "facebook", "wikipedia", "youtube", "twitter",
         "instagram", "google", "linkedin", "tiktok", "snapchat", "pinterest", "reddit",
         "amazon", "souq"]

URL_RES = [
    re.compile(r"(?:https?|ftp)://\S+", re.I),
    re.compile(r"\bwww\.\S+", re.I),
    re.compile(r"\b[A-Za-z0-9][A-Za-z0-9-]*(?:\.[A-Za-z0-9-]+)*\.(?:com|net|org|info|edu|gov|io"
               r"|co|me|tv|sa|ae|eg|ma|dz|qa|kw|jo|lb|iq|om|bh|ly|tn|sy|ye|sd)\b(?:/\S*)?", re.I),
]

UNIFY = {"آ": "ا", "أ": "ا", "إ": "ا", "ى": "ي",
         "ة": "ه"}


def normalize(text):
    prev = None
    while prev != text:
        prev = text
        text = unicodedata.normalize("NFC", text)
        text = "".join(c for c in text if not ("ً" <= c <= "ْ" or c == "ـ"))
        text = "".join(UNIFY.get(c, c) for c in text)
        text = "".join(c.lower() if "LATIN" in unicodedata.name(c, "") else c for c in text)
        text = " ".join(text.split())
    return text


def is_punct(c):
    if ord(c) < 128:
        return not c.isalnum() and not c.isspace()
    return unicodedata.category(c).startswith("P")


def clean(raw):
    text = normalize(raw)
    for rx in URL_RES:
        text = rx.sub(" ", text)
    text = "".join(" " if is_punct(c) else c for c in text)
    tokens = text.split()
    folded = [t.lower() for t in tokens]
    sites = sorted((s.split() for s in SITES), key=len, reverse=True)
    kept, i = [], 0
    while i < len(tokens):
        for s in sites:
            if folded[i:i + len(s)] == s:
                i += len(s)
                break
        else:
            kept.append(tokens[i])
            i += 1
    out, i = [], 0
    while i < len(kept):
        j = i
        while j < len(kept) and kept[j] == kept[i]:
            j += 1
        if j - i <= 3:
            out.extend(kept[i:j])
        i = j
    return out


def is_arabic(c):
    o = ord(c)
    return 0x600 <= o <= 0x6FF or 0x750 <= o <= 0x77F or 0xFB50 <= o <= 0xFDFF or 0xFE70 <= o <= 0xFEFF


def charset(text):
    chars = [c for c in text if not c.isspace()]
    alnum = sum(1 for c in chars if unicodedata.category(c)[0] == "L" or unicodedata.category(c) == "Nd")
    alpha = [c for c in chars if unicodedata.category(c)[0] == "L"]
    arabic = sum(1 for c in alpha if is_arabic(c))
    return len(chars), alnum, len(alpha), arabic


def oracle(query, title, rank):
    if rank > 5:
        return "top_rank"
    q, t = clean(query), clean(title)
    qs, ts = " ".join(q), " ".join(t)
    if len(qs) < 20 or len(ts) < 20:
        return "min_chars"
    if len(q) < 3 or len(t) < 3:
        return "min_tokens"
    if abs(len(q) - len(t)) > 3:
        return "token_diff"
    for s in (qs, ts):
        n, alnum, _, _ = charset(s)
        if n == 0 or alnum + 1e-9 < 0.9 * n:
            return "alnum_ratio"
    for s in (qs, ts):
        _, _, alpha, arabic = charset(s)
        if alpha == 0 or arabic + 1e-9 < 0.7 * alpha:
            return "arabic_ratio"
    return "kept"


# (query, title, rank, label). Rank is written verbatim so malformed rows
# can carry broken values.
ROWS = [
    # ---- kept
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك الاهلي", "1", "kept"),
    ("اسعار الذهب اليوم عيار واحد", "اسعار الذهب اليوم في السعودية عيار", "2", "kept"),
    ("طريقة عمل الكيك بالشوكولاته", "طريقة عمل الكيك بالشوكولاته في البيت", "1", "kept"),
    ("نتائج مباريات الدوري الاسباني", "نتائج مباريات الدوري الاسباني اليوم", "3", "kept"),
    ("موعد مباراة الهلال والنصر القادمة", "موعد مباراة الهلال والنصر في الدوري", "1", "kept"),
    ("حجز تذاكر طيران رخيصة الى دبي", "حجز تذاكر طيران رخيصة من الرياض الى دبي", "2", "kept"),
    ("شقق للايجار في عمان الغربية", "شقق للايجار في عمان باسعار مناسبة", "4", "kept"),
    ("رقم هاتف شركة الكهرباء الوطنية", "رقم هاتف شركة الكهرباء خدمة العملاء", "1", "kept"),
    ("تحميل برنامج تصميم الصور مجانا", "تحميل برنامج تصميم الصور للكمبيوتر مجانا", "2", "kept"),
    ("افضل مطاعم الرياض للعائلات", "افضل مطاعم الرياض الراقية للعائلات", "1", "kept"),
    ("بِسْــمِ الله الرحمن الرحيم كاملة", "بسم الله الرحمن الرحيم مكتوبة كاملة", "1", "kept"),
    ("أسعار السيارات الجديدة في الإمارات", "اسعار السيارات الجديدة في الامارات ٢٠٢٤", "2", "kept"),
    ("درجات الحرارة في جدة غدا", "درجات الحرارة المتوقعة في جدة غدا", "1", "kept"),
    ("سعر الدولار اليوم في السوق | فيسبوك", "سعر الدولار اليوم في السوق السوداء", "1", "kept"),
    ("وصفات سهلة وسريعة للعشاء", "وصفات سهلة وسريعة للعشاء من ويكيبيديا اليوم", "3", "kept"),
    ("تفسير الاحلام لابن سيرين كامل", "تفسير الاحلام لابن سيرين www.example.com كامل", "2", "kept"),
    ("مواقيت الصلاة في القاهرة اليوم", "مواقيت الصلاة في القاهرة https://prayer.example.org/cairo", "1", "kept"),
    ("ارخص فنادق دبي قريبة من المول", "ارخص فنادق دبي القريبة من دبي مول", "5", "kept"),
    ("كيف اتعلم اللغة الانجليزية بسرعة", "كيف اتعلم اللغة الانجليزية بسرعة وسهولة", "2", "kept"),
    ("أعراض نقص فيتامين د عند النساء", "اعراض نقص فيتامين د عند النساء وعلاجه", "1", "kept"),
    # boundary: exactly 20 code points on the query side
    ("سعر الذهب في البحرين", "سعر الذهب في البحرين اليوم مباشر", "1", "kept"),
    # boundary: exactly 3 tokens on both sides
    ("جوالات سامسونج الجديدة", "جوالات سامسونج الجديدة", "2", "kept"),
    # boundary: token difference exactly 3
    ("اسعار الذهب المستعمل", "اسعار الذهب المستعمل في السعودية اليوم", "1", "kept"),
    # boundary: rank exactly 5
    ("سعر الدولار اليوم في لبنان", "سعر الدولار اليوم في السوق اللبنانية", "5", "kept"),
    # boundary: a run of exactly 3 identical tokens survives
    ("سعر سعر سعر الذهب اليوم", "سعر الذهب اليوم في دبي مباشر", "1", "kept"),
    # boundary: alnum ratio exactly 0.9 (27 letters, 3 stars)
    ("سعرالذهب ★ اليومفيعمان ★ عياركامل ★", "سعر الذهب اليوم في عمان عيار كامل", "1", "kept"),
    # boundary: Arabic share of letters exactly 0.7 (14 Arabic, 6 Latin)
    ("تحميل برنامج zoom لعب ab", "تحميل برنامج zoom لعب ab", "1", "kept"),
    ("هاتف iphone الجديد سعره ومواصفاته", "هاتف iphone الجديد سعر ومواصفات كاملة", "2", "kept"),
    ("مسلسل الاختيار الحلقة الاخيرة كاملة", "مسلسل الاختيار الحلقة الاخيرة كاملة يوتيوب اون لاين", "1", "kept"),
    ("شروط القبول في جامعة الملك سعود", "شروط القبول في جامعة الملك سعود للطلاب", "3", "kept"),
    ("اسعار الشقق في القاهرة الجديدة", "اسعار الشقق في القاهرة الجديدة للبيع", "2", "kept"),
    ("مواعيد عمل البنوك في رمضان", "مواعيد عمل البنوك في شهر رمضان", "1", "kept"),

    # ---- top_rank
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك الاهلي", "6", "top_rank"),
    ("اسعار الذهب اليوم عيار واحد", "اسعار الذهب اليوم في السعودية عيار", "7", "top_rank"),
    ("طريقة عمل الكيك بالشوكولاته", "طريقة عمل الكيك بالشوكولاته في البيت", "10", "top_rank"),
    ("نتائج مباريات الدوري الاسباني", "نتائج مباريات الدوري الاسباني اليوم", "25", "top_rank"),
    ("x", "y", "8", "top_rank"),
    ("موعد مباراة الهلال والنصر القادمة", "hello world", "99", "top_rank"),
    ("رقم هاتف شركة الكهرباء الوطنية", "رقم هاتف شركة الكهرباء خدمة العملاء", "6", "top_rank"),
    ("حجز تذاكر طيران رخيصة الى دبي", "★★★★", "12", "top_rank"),
    ("شقق للايجار في عمان الغربية", "شقق للايجار في عمان باسعار مناسبة", "1000", "top_rank"),
    ("افضل مطاعم الرياض للعائلات", "افضل مطاعم الرياض الراقية للعائلات", "6", "top_rank"),

    # ---- min_chars
    ("سعر الذهب في قطر", "سعر الذهب في قطر اليوم مباشر الان", "1", "min_chars"),
    ("سعر الذهب في الكويت اليوم", "سعر الذهب اليوم", "1", "min_chars"),
    ("سعر الذهب فالبحرين", "سعر الذهب اليوم في البحرين", "2", "min_chars"),
    ("بِسْــمِ الله كاملة الان", "بسم الله الرحمن الرحيم مكتوبة", "1", "min_chars"),
    ("سعر الدولار فيسبوك يوتيوب", "سعر الدولار اليوم في السوق الموازية", "1", "min_chars"),
    ("اخبار مصر www.news.example.com", "اخبار مصر اليوم العاجلة والمهمة", "1", "min_chars"),
    ("طقس جدة غدا", "طقس جدة غدا درجات الحرارة", "3", "min_chars"),
    ("!!! ؟؟؟ ... ،،،", "سعر الذهب اليوم في الامارات", "1", "min_chars"),
    ("اسعار الذهب اليوم في مصر", "ذهب مصر", "2", "min_chars"),
    ("a b c d e f g h i", "سعر الذهب اليوم في الامارات", "1", "min_chars"),

    # ---- min_tokens
    ("الاستثماراتالعقارية المستقبلية", "الاستثمارات العقارية المستقبلية في دبي", "1", "min_tokens"),
    ("سعر الدولار اليوم في مصر", "الاستثماراتالعقارية المستقبلية", "1", "min_tokens"),
    ("كلمة كلمة كلمة كلمة المرورالجديدة للحساب", "تغيير كلمة المرور الجديدة للحساب", "1", "min_tokens"),
    ("تحميلالبرامجالمجانية للكمبيوتر", "تحميل البرامج المجانية للكمبيوتر", "2", "min_tokens"),
    ("مستشفىالملكفيصلالتخصصي بالرياض", "مستشفى الملك فيصل التخصصي بالرياض", "1", "min_tokens"),
    ("الالعابالالكترونية للاطفال", "الالعاب الالكترونية المفيدة للاطفال", "3", "min_tokens"),
    ("جامعةالملكعبدالعزيز بجدة", "جامعة الملك عبدالعزيز بجدة القبول", "1", "min_tokens"),
    ("سعر سعر سعر سعر الذهبالعالمي اليومالمباشر", "سعر الذهب العالمي اليوم مباشر", "1", "min_tokens"),

    # ---- token_diff
    ("اسعار الذهب المستعمل", "اسعار الذهب المستعمل في السعودية مباشر الان", "1", "token_diff"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في مصر البنك الاهلي والبنوك الاخرى", "1", "token_diff"),
    ("جوالات سامسونج الجديدة", "جوالات سامسونج الجديدة لعام الفين واربعة وعشرين", "2", "token_diff"),
    ("حجز تذاكر طيران رخيصة جدا من الرياض الى القاهرة مباشرة", "حجز تذاكر طيران رخيصة", "1", "token_diff"),
    ("طريقة عمل البيتزا الايطالية", "طريقة عمل البيتزا الايطالية في البيت بسهولة وبسرعة", "1", "token_diff"),
    ("مواعيد قطارات القاهرة", "مواعيد قطارات القاهرة الى الاسكندرية اليوم والغد", "4", "token_diff"),
    ("نتائج الثانوية العامة", "نتائج الثانوية العامة برقم الجلوس في جميع المحافظات", "1", "token_diff"),
    ("شقق للايجار في الزرقاء", "شقق للايجار في الزرقاء الغربية باسعار مناسبة جدا", "2", "token_diff"),

    # ---- alnum_ratio
    ("سعر الذهب ★★ اليوم ★★", "سعر الذهب اليوم في السعودية", "1", "alnum_ratio"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار ☺☺☺ اليوم ☺☺", "1", "alnum_ratio"),
    ("❤❤❤ اغاني حب رومانسية ❤❤❤", "اغاني حب رومانسية جديدة", "2", "alnum_ratio"),
    ("عروض رمضان ✓✓✓ هايبر ✓✓", "عروض رمضان في هايبر بنده", "1", "alnum_ratio"),
    ("سعر اليورو ∞∞ اليوم ∞∞ مصر", "سعر اليورو اليوم في مصر", "1", "alnum_ratio"),
    ("خلفيات ☀☀☀ جميلة ☀☀ للجوال", "خلفيات جميلة للجوال عالية الدقة", "3", "alnum_ratio"),
    ("رموز ♫♫♫ للزخرفة ♪♪♪ والكتابة", "رموز للزخرفة والكتابة بالعربي", "1", "alnum_ratio"),
    ("ساعات ⌚⌚⌚ رجالية ⌚⌚ فاخرة", "ساعات رجالية فاخرة باسعار مناسبة", "1", "alnum_ratio"),

    # ---- arabic_ratio
    ("how to learn english fast", "how to learn english fast online", "1", "arabic_ratio"),
    ("سعر الدولار اليوم في مصر", "dollar price today in egypt bank", "1", "arabic_ratio"),
    ("download free software pc", "download free software for pc", "2", "arabic_ratio"),
    ("برنامج photoshop download free", "برنامج photoshop download free", "1", "arabic_ratio"),
    ("iphone 15 pro max price", "iphone 15 pro max price in dubai", "1", "arabic_ratio"),
    ("1234567890 12345 67890", "سعر الذهب اليوم في السعودية", "1", "arabic_ratio"),
    ("best restaurants in riyadh", "افضل مطاعم الرياض للعائلات", "3", "arabic_ratio"),
    ("مباراة real madrid barcelona live", "مباراة real madrid barcelona live", "1", "arabic_ratio"),
    ("нужно купить машину сегодня", "нужно купить машину сегодня дешево", "1", "arabic_ratio"),
    ("فيلم the dark knight rises", "فيلم the dark knight rises كامل", "2", "arabic_ratio"),

    # ---- malformed (not records; counted by the loader)
    ("سعر الدولار اليوم", "سعر الدولار اليوم في مصر", None, "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "abc", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "0", "malformed"),
    ("سعر الدولار اليوم في مصر", "", "1", "malformed"),
    ("", "سعر الدولار اليوم في البنك", "1", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "1\textra", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "-3", "malformed"),
    ("   ", "سعر الدولار اليوم في البنك", "2", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "2.5", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", " ", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "1e2", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "١", "malformed"),
    ("سعر الدولار اليوم في مصر", "سعر الدولار اليوم في البنك", "99999999999999999999", "malformed"),
]


def main():
    if len(ROWS) != 100:
        sys.exit(f"expected 100 rows, have {len(ROWS)}")
    bad = []
    lines, labels = [], []
    for n, (q, t, r, label) in enumerate(ROWS, start=1):
        lines.append(q + "\t" + t if r is None else f"{q}\t{t}\t{r}")
        labels.append(f"{n}\t{label}")
        if label == "malformed":
            continue
        got = oracle(q, t, int(r))
        if got != label:
            bad.append(f"row {n}: labeled {label}, rules give {got}: {q!r} / {t!r}")
    if bad:
        sys.exit("\n".join(bad))

    (HERE / "prefilter_fixture.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (HERE / "prefilter_labels.tsv").write_text("\n".join(labels) + "\n", encoding="utf-8")

    counts = {f: 0 for f in FILTERS}
    kept = malformed = 0
    for *_, label in ROWS:
        if label == "kept":
            kept += 1
        elif label == "malformed":
            malformed += 1
        else:
            counts[label] += 1
    records = len(ROWS) - malformed
    report = [f"{f}\t{counts[f]}" for f in FILTERS]
    report.append(f"malformed_rows\t{malformed}")
    report += [f"input\t{records}", f"output\t{kept}"]
    (HERE / "prefilter_golden.report").write_text("\n".join(report) + "\n", encoding="utf-8")
    print(f"rows {len(ROWS)} records {records} kept {kept} malformed {malformed}")


if __name__ == "__main__":
    main()
