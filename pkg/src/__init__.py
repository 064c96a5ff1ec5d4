# gencorr: обобщённые корреляции и точный вывод о коэффициенте корреляции
